#include "erf/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "erf/error.hpp"
#include "erf/metrics.hpp"
#include "erf/parallel.hpp"

namespace erforest {

TreeRankingIndex::TreeRankingIndex(std::size_t rows, std::size_t trees, std::vector<double> probs,
                                   std::span<const std::uint8_t> labels)
    : rows_(rows), trees_(trees), order_(rows * trees), probs_(std::move(probs)) {
  if (probs_.size() != rows * trees || labels.size() != rows) {
    throw std::invalid_argument("TreeRankingIndex: probs must be rows x trees with one label per row");
  }
  for (std::size_t z = 0; z < rows; ++z) {
    auto ord = std::span<std::uint32_t>(order_.data() + z * trees, trees);
    const double* p = probs_.data() + z * trees;
    std::iota(ord.begin(), ord.end(), std::uint32_t{0});
    if (labels[z]) {
      std::stable_sort(ord.begin(), ord.end(), [p](std::uint32_t a, std::uint32_t b) { return p[a] > p[b]; });
    } else {
      std::stable_sort(ord.begin(), ord.end(), [p](std::uint32_t a, std::uint32_t b) { return p[a] < p[b]; });
    }
  }
}

TreeRankingIndex build_rankings(const ForestModel& forest, const Dataset& train, unsigned threads) {
  if (train.rows() == 0) throw DataError("build_rankings: empty training set");
  if (train.cols() != forest.n_features) throw DataError("build_rankings: feature count differs from the forest");
  const std::size_t nt = forest.trees.size();
  std::vector<double> probs(train.rows() * nt);
  parallel_for(train.rows(), threads, [&](std::size_t z) {
    const auto x = train.features.row(z);
    for (std::size_t i = 0; i < nt; ++i) probs[z * nt + i] = forest.trees[i].predict(x);
  });
  return TreeRankingIndex(train.rows(), nt, std::move(probs), train.labels);
}

NeighborIndex::NeighborIndex(const Dataset& train, const FeatureStats& stats, bool standardize)
    : cols_(train.cols()), shift_(cols_, 0.0), scale_(cols_, 1.0), row_ids_(train.row_ids) {
  if (standardize) {
    if (stats.mean.size() != cols_ || stats.stddev.size() != cols_ || stats.constant.size() != cols_) {
      throw std::invalid_argument("NeighborIndex: statistics do not match the training columns");
    }
    for (std::size_t j = 0; j < cols_; ++j) {
      shift_[j] = stats.mean[j];
      scale_[j] = stats.constant[j] ? 0.0 : 1.0 / stats.stddev[j];
    }
  }
  points_.reserve(train.rows() * cols_);
  for (std::size_t r = 0; r < train.rows(); ++r) {
    auto t = transform(train.features.row(r));
    points_.insert(points_.end(), t.begin(), t.end());
  }
}

std::vector<double> NeighborIndex::transform(std::span<const double> x) const {
  std::vector<double> out(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out[j] = scale_[j] == 0.0 ? 0.0 : (x[j] - shift_[j]) * scale_[j];
  return out;
}

NeighborSet NeighborIndex::query(std::span<const double> x, std::size_t m) const {
  const std::size_t n = row_ids_.size();
  if (x.size() != cols_) throw std::invalid_argument("nearest_neighbors: feature count mismatch");
  if (m < 1 || m > n) {
    throw std::invalid_argument("nearest_neighbors: M must lie in [1, " + std::to_string(n) + "]");
  }
  const auto q = transform(x);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double* p = points_.data() + r * cols_;
    double d = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      const double diff = p[j] - q[j];
      d += diff * diff;
    }
    dist[r] = {d, r};
  }
  auto closer = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return row_ids_[a.second] < row_ids_[b.second];
  };
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m), dist.end(), closer);
  NeighborSet out;
  for (std::size_t i = 0; i < m; ++i) {
    out.indices.push_back(dist[i].second);
    out.row_ids.push_back(row_ids_[dist[i].second]);
    out.distances.push_back(std::sqrt(dist[i].first));
  }
  return out;
}

NeighborSet nearest_neighbors(std::span<const double> x, const Dataset& train, std::size_t m,
                              const FeatureStats& stats) {
  return NeighborIndex(train, stats).query(x, m);
}

namespace {

void check_l(std::size_t l, const TreeRankingIndex& rankings) {
  if (l < 1 || l > rankings.trees()) {
    throw std::invalid_argument("L must lie in [1, " + std::to_string(rankings.trees()) + "]");
  }
}

std::vector<std::size_t> appearance_counts(const NeighborSet& neighbors, const TreeRankingIndex& rankings,
                                           std::size_t l) {
  check_l(l, rankings);
  std::vector<std::size_t> counts(rankings.trees(), 0);
  for (std::size_t z : neighbors.indices) {
    const auto ord = rankings.ranking(z);
    for (std::size_t r = 0; r < l; ++r) ++counts[ord[r]];
  }
  return counts;
}

// Equal weights take the forest's own averaging path so that L = N_t
// reproduces the uniform prediction bit for bit.
double dot(std::span<const double> u, std::span<const double> p) {
  if (!u.empty() && std::abs(u[0] * static_cast<double>(u.size()) - 1.0) < 1e-12 &&
      std::all_of(u.begin(), u.end(), [&](double v) { return v == u[0]; })) {
    double total = 0.0;
    for (double v : p) total += v;
    return total / static_cast<double>(p.size());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * p[i];
  return sum;
}

std::vector<double> min_max(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  if (*hi == *lo) return out;
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
  return out;
}

}  // namespace

std::vector<double> tree_weights(const NeighborSet& neighbors, const TreeRankingIndex& rankings, std::size_t l) {
  if (neighbors.indices.empty()) throw std::invalid_argument("tree_weights: empty neighbor set");
  const auto counts = appearance_counts(neighbors, rankings, l);
  const double denom = static_cast<double>(neighbors.indices.size() * l);
  std::vector<double> u(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) u[i] = static_cast<double>(counts[i]) / denom;
  return u;
}

double weighted_predict(const ForestModel& forest, std::span<const double> u, std::span<const double> x) {
  if (u.size() != forest.trees.size()) throw std::invalid_argument("weighted_predict: one weight per tree");
  if (x.size() != forest.n_features) throw std::invalid_argument("weighted_predict: feature count mismatch");
  return dot(u, forest.predict_trees(x));
}

TreeScoreVector tree_scores(const NeighborSet& neighbors, const TreeRankingIndex& rankings, std::size_t l) {
  check_l(l, rankings);
  TreeScoreVector out;
  out.u = tree_weights(neighbors, rankings, l);
  const std::size_t nt = rankings.trees();
  out.s1.assign(nt, 0.0);
  out.s2.assign(nt, 0.0);
  for (std::size_t z : neighbors.indices) {
    const auto ord = rankings.ranking(z);
    for (std::size_t r = 0; r < l; ++r) {
      out.s1[ord[r]] += 1.0;
      out.s2[ord[r]] -= static_cast<double>(r + 1);
    }
  }
  out.s1_norm = min_max(out.s1);
  out.s2_norm = min_max(out.s2);
  out.score.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) out.score[i] = (out.s1_norm[i] + out.s2_norm[i]) / 2.0;
  return out;
}

ExplanationReport explain(const ForestModel& forest, const TreeRankingIndex& rankings,
                          const NeighborIndex& neighbors, std::span<const double> x, std::size_t m,
                          std::size_t l, std::size_t k, double threshold) {
  if (k < 1) throw std::invalid_argument("explain: k must be >= 1");
  if (rankings.trees() != forest.trees.size()) throw std::invalid_argument("explain: rankings do not match forest");
  ExplanationReport report;
  report.neighbors = neighbors.query(x, m);
  const auto scores = tree_scores(report.neighbors, rankings, l);
  report.probability = weighted_predict(forest, scores.u, x);
  report.predicted_class = report.probability >= threshold ? 1 : 0;

  std::vector<std::size_t> order(forest.trees.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores.score[a] != scores.score[b]) return scores.score[a] > scores.score[b];
    if (scores.u[a] != scores.u[b]) return scores.u[a] > scores.u[b];
    return a < b;
  });
  order.resize(std::min(k, order.size()));
  for (std::size_t i : order) {
    report.top.push_back({i, scores.score[i], scores.u[i], scores.s1_norm[i], scores.s2_norm[i]});
  }
  return report;
}

std::vector<WeightingParams> default_weighting_grid(std::size_t n_rows, std::size_t n_trees) {
  std::vector<WeightingParams> grid;
  for (std::size_t m : {5, 10, 25, 50}) {
    if (m > n_rows) continue;
    for (std::size_t l : {std::size_t{5}, std::size_t{10}, std::size_t{25}, std::size_t{50}, n_trees}) {
      if (l > n_trees) continue;
      grid.push_back({m, l});
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) grid.push_back({std::min<std::size_t>(n_rows, 1), n_trees});
  return grid;
}

namespace {

// For each query row: its largest neighbor set and its per-tree probabilities.
struct QueryCache {
  std::vector<NeighborSet> neighbors;
  std::vector<std::vector<double>> probs;
};

QueryCache cache_queries(const ForestModel& forest, const NeighborIndex& index, const FeatureMatrix& x,
                         std::size_t max_m, unsigned threads) {
  QueryCache c;
  c.neighbors.resize(x.rows());
  c.probs.resize(x.rows());
  parallel_for(x.rows(), threads, [&](std::size_t r) {
    c.neighbors[r] = index.query(x.row(r), max_m);
    c.probs[r] = forest.predict_trees(x.row(r));
  });
  return c;
}

NeighborSet prefix(const NeighborSet& n, std::size_t m) {
  NeighborSet out;
  out.indices.assign(n.indices.begin(), n.indices.begin() + static_cast<std::ptrdiff_t>(m));
  return out;
}

std::vector<double> predictions_from_cache(const QueryCache& c, const TreeRankingIndex& rankings,
                                           WeightingParams params) {
  std::vector<double> out(c.neighbors.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto u = tree_weights(prefix(c.neighbors[r], params.m), rankings, params.l);
    out[r] = dot(u, c.probs[r]);
  }
  return out;
}

}  // namespace

std::vector<double> weighted_predictions(const ForestModel& forest, const TreeRankingIndex& rankings,
                                         const NeighborIndex& neighbors, const FeatureMatrix& x,
                                         WeightingParams params, unsigned threads) {
  if (x.cols() != forest.n_features) throw std::invalid_argument("weighted_predictions: feature count mismatch");
  const auto cache = cache_queries(forest, neighbors, x, params.m, threads);
  return predictions_from_cache(cache, rankings, params);
}

WeightingSelection select_weighting_params(const ForestModel& forest, const TreeRankingIndex& rankings,
                                           const NeighborIndex& neighbors, const Dataset& val,
                                           std::span<const WeightingParams> grid, unsigned threads) {
  if (grid.empty()) throw std::invalid_argument("select_weighting_params: empty grid");
  std::vector<WeightingParams> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t max_m = 0;
  for (const auto& g : sorted) max_m = std::max(max_m, g.m);
  const auto cache = cache_queries(forest, neighbors, val.features, max_m, threads);

  WeightingSelection sel;
  sel.val_auc = -1.0;
  for (const auto& g : sorted) {
    const double a = auc(predictions_from_cache(cache, rankings, g), val.labels);
    sel.scores.emplace_back(g, a);
    if (a > sel.val_auc) {
      sel.val_auc = a;
      sel.best = g;
    }
  }
  return sel;
}

}  // namespace erforest
