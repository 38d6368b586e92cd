#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "erf/cart.hpp"
#include "erf/forest.hpp"
#include "erf/metrics.hpp"
#include "erf/weighting.hpp"

namespace {

erforest::Dataset synthetic(std::size_t n, std::size_t p, std::uint64_t seed) {
  erforest::Rng rng(seed);
  erforest::Dataset d;
  d.features = erforest::FeatureMatrix(n, p);
  d.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      d.features(r, c) = rng.uniform() * 2.0 - 1.0;
      s += (c % 2 ? -1.0 : 1.0) * d.features(r, c);
    }
    d.labels[r] = s + 0.5 * (rng.uniform() - 0.5) > 0.0 ? 1 : 0;
  }
  for (std::size_t c = 0; c < p; ++c) d.column_names.push_back("x" + std::to_string(c));
  d.row_ids.resize(n);
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::int64_t{0});
  return d;
}

void BM_FitTree(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = synthetic(n, 10, 1);
  const std::vector<double> w(n, 1.0);
  erforest::TrainConfig cfg;
  const erforest::PresortedColumns sorted(d.features);
  for (auto _ : state) {
    erforest::Rng rng(2);
    benchmark::DoNotOptimize(erforest::fit_tree(sorted, d.labels, w, cfg, rng));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FitTree)->Arg(1000)->Arg(10000);

void BM_PredictForest(benchmark::State& state) {
  const auto d = synthetic(2000, 10, 3);
  const std::vector<double> w(2000, 1.0), s(2000, 1.0 / 2000.0);
  erforest::TrainConfig cfg;
  cfg.n_trees = 200;
  const auto forest = erforest::fit_forest(d, w, s, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(forest.predict(d.features));
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_PredictForest);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  erforest::Rng rng(4);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = i % 3 == 0 ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(erforest::auc(scores, labels));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

void BM_NeighborQuery(benchmark::State& state) {
  const auto d = synthetic(static_cast<std::size_t>(state.range(0)), 12, 5);
  const erforest::NeighborIndex index(d, erforest::compute_stats(d));
  const std::vector<double> x(12, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(index.query(x, 25));
}
BENCHMARK(BM_NeighborQuery)->Arg(1000)->Arg(20000);

}  // namespace
BENCHMARK_MAIN();
