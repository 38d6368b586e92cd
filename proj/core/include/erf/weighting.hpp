#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "erf/dataset.hpp"
#include "erf/forest.hpp"

namespace erforest {

// Per training row, the trees ordered from best to worst for that row's own
// label: descending p when y = 1, ascending when y = 0, ties by tree index.
class TreeRankingIndex {
 public:
  TreeRankingIndex() = default;
  // probs is row-major, rows x trees.
  TreeRankingIndex(std::size_t rows, std::size_t trees, std::vector<double> probs,
                   std::span<const std::uint8_t> labels);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t trees() const noexcept { return trees_; }
  std::span<const std::uint32_t> ranking(std::size_t row) const { return {order_.data() + row * trees_, trees_}; }
  std::span<const double> tree_probs(std::size_t row) const { return {probs_.data() + row * trees_, trees_}; }

  friend bool operator==(const TreeRankingIndex&, const TreeRankingIndex&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t trees_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<double> probs_;
};

TreeRankingIndex build_rankings(const ForestModel& forest, const Dataset& train, unsigned threads = 1);

struct NeighborSet {
  std::vector<std::size_t> indices;  // positions in the training set, nearest first
  std::vector<std::int64_t> row_ids;
  std::vector<double> distances;
};

// Brute-force kNN over the training rows. With standardize set, each column
// is z-scored with the training statistics and constant columns are ignored.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  NeighborIndex(const Dataset& train, const FeatureStats& stats, bool standardize = true);

  // The M closest rows, ties by ascending row_id. Throws std::invalid_argument unless 1 <= M <= N.
  NeighborSet query(std::span<const double> x, std::size_t m) const;
  std::size_t rows() const noexcept { return row_ids_.size(); }

 private:
  std::vector<double> transform(std::span<const double> x) const;

  std::size_t cols_ = 0;
  std::vector<double> shift_;
  std::vector<double> scale_;  // 0 drops the column
  std::vector<double> points_;
  std::vector<std::int64_t> row_ids_;
};

NeighborSet nearest_neighbors(std::span<const double> x, const Dataset& train, std::size_t m,
                              const FeatureStats& stats);

// u_i = (appearances of tree i in the neighbors' top-L lists) / (M L).
std::vector<double> tree_weights(const NeighborSet& neighbors, const TreeRankingIndex& rankings, std::size_t l);

// sum_i u_i p_i(x).
double weighted_predict(const ForestModel& forest, std::span<const double> u, std::span<const double> x);

struct TreeScoreVector {
  std::vector<double> u;
  std::vector<double> s1;  // appearance counts
  std::vector<double> s2;  // minus the sum of the ranks (1-based) over appearances
  std::vector<double> s1_norm;
  std::vector<double> s2_norm;
  std::vector<double> score;  // (s1_norm + s2_norm) / 2
};

// Min-max normalization runs over all trees, absent trees entering as 0; a
// constant vector normalizes to all zeros.
TreeScoreVector tree_scores(const NeighborSet& neighbors, const TreeRankingIndex& rankings, std::size_t l);

struct ExplainedTree {
  std::size_t tree = 0;
  double score = 0.0;
  double weight = 0.0;
  double s1_norm = 0.0;
  double s2_norm = 0.0;
};

struct ExplanationReport {
  NeighborSet neighbors;
  std::vector<ExplainedTree> top;  // by score, then weight, then lower index
  double probability = 0.0;        // weighted prediction
  int predicted_class = 0;
};

ExplanationReport explain(const ForestModel& forest, const TreeRankingIndex& rankings,
                          const NeighborIndex& neighbors, std::span<const double> x, std::size_t m,
                          std::size_t l, std::size_t k, double threshold);

struct WeightingParams {
  std::size_t m = 0;
  std::size_t l = 0;

  friend bool operator==(const WeightingParams&, const WeightingParams&) = default;
  friend auto operator<=>(const WeightingParams&, const WeightingParams&) = default;
};

// M in {5, 10, 25, 50}, L in {5, 10, 25, 50, n_trees}, limited to M <= n_rows and L <= n_trees.
std::vector<WeightingParams> default_weighting_grid(std::size_t n_rows, std::size_t n_trees);

struct WeightingSelection {
  WeightingParams best;
  double val_auc = 0.0;
  std::vector<std::pair<WeightingParams, double>> scores;  // every grid point, in (M, L) order
};

// Weighted predictions for every row of x at one (M, L).
std::vector<double> weighted_predictions(const ForestModel& forest, const TreeRankingIndex& rankings,
                                         const NeighborIndex& neighbors, const FeatureMatrix& x,
                                         WeightingParams params, unsigned threads = 1);

// Grid search on validation AUC; ties go to the smaller M, then the smaller L.
WeightingSelection select_weighting_params(const ForestModel& forest, const TreeRankingIndex& rankings,
                                           const NeighborIndex& neighbors, const Dataset& val,
                                           std::span<const WeightingParams> grid, unsigned threads = 1);

}  // namespace erforest
