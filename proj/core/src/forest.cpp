#include "erf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "erf/error.hpp"
#include "erf/parallel.hpp"

namespace erforest {

double ForestModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

std::vector<double> ForestModel::predict(const FeatureMatrix& x) const {
  if (x.cols() != n_features) throw std::invalid_argument("predict: feature count mismatch");
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

std::vector<double> ForestModel::predict_trees(std::span<const double> x) const {
  std::vector<double> out(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) out[i] = trees[i].predict(x);
  return out;
}

std::vector<std::uint32_t> uniform_bootstrap(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> out(n);
  for (auto& v : out) v = static_cast<std::uint32_t>(rng.below(n));
  return out;
}

std::vector<std::uint32_t> bootstrap_indices(std::size_t n, std::span<const double> probs, Rng& rng) {
  if (probs.size() != n || n == 0) throw std::invalid_argument("bootstrap_indices: probs must have n > 0 entries");
  double total = 0.0;
  bool uniform = true;
  for (double s : probs) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("bootstrap_indices: negative probability");
    total += s;
    uniform = uniform && s == probs[0];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("bootstrap_indices: probabilities must sum to 1");
  if (uniform) return uniform_bootstrap(n, rng);

  std::vector<double> cumulative(n);
  std::partial_sum(probs.begin(), probs.end(), cumulative.begin());
  // Last category that actually has mass; guards u * total landing past the end.
  std::size_t last = n - 1;
  while (last > 0 && probs[last] == 0.0) --last;
  std::vector<std::uint32_t> out(n);
  for (auto& v : out) {
    const double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    v = static_cast<std::uint32_t>(std::min(idx, last));
  }
  return out;
}

ForestModel fit_forest(const Dataset& train, std::span<const double> weights,
                       std::span<const double> probs, const TrainConfig& config, unsigned threads) {
  const std::size_t n = train.rows();
  if (n == 0) throw DataError("fit_forest: empty training set");
  if (weights.size() != n || probs.size() != n) {
    throw std::invalid_argument("fit_forest: weights/probs length must equal the number of rows");
  }
  config.validate(train.cols());
  double weight_total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("fit_forest: weights must be non-negative");
    weight_total += w;
  }
  if (!(weight_total > 0.0)) throw TrainingError("fit_forest: weights sum to zero");

  ForestModel forest;
  forest.config = config;
  forest.training_row_ids = train.row_ids;
  forest.n_features = train.cols();
  forest.trees.resize(static_cast<std::size_t>(config.n_trees));
  forest.bootstrap_log.resize(static_cast<std::size_t>(config.n_trees));

  const PresortedColumns sorted(train.features);
  parallel_for(static_cast<std::size_t>(config.n_trees), threads, [&](std::size_t k) {
    Rng rng(derive_seed(config.seed, k));
    auto draws = config.use_sample_probs ? bootstrap_indices(n, probs, rng) : uniform_bootstrap(n, rng);
    std::vector<double> row_weight(n, 0.0);
    for (std::uint32_t i : draws) row_weight[i] += config.use_sample_weights ? weights[i] : 1.0;
    forest.trees[k] = fit_tree(sorted, train.labels, row_weight, config, rng);
    forest.bootstrap_log[k] = std::move(draws);
  });
  return forest;
}

double predict_forest(const ForestModel& forest, std::span<const double> x) {
  if (x.size() != forest.n_features) {
    throw std::invalid_argument("predict_forest: expected " + std::to_string(forest.n_features) +
                                " features, got " + std::to_string(x.size()));
  }
  return forest.predict(x);
}

std::vector<double> forest_mdi(const ForestModel& forest) {
  std::vector<double> out(forest.n_features, 0.0);
  if (forest.trees.empty()) return out;
  for (const auto& t : forest.trees) {
    auto imp = tree_mdi(t);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += imp[j];
  }
  for (double& v : out) v /= static_cast<double>(forest.trees.size());
  return out;
}

}  // namespace erforest
