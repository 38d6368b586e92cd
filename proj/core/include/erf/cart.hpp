#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "erf/dataset.hpp"
#include "erf/random.hpp"

namespace erforest {

enum class FeatureMode {
  per_split,  // draw mtry candidate features independently at every split
  per_tree,   // draw mtry features once per tree and use all of them at every split
};

// Training knobs shared by trees, forests and the reweighting loop.
struct TrainConfig {
  int n_trees = 200;
  int max_depth = 6;
  FeatureMode feature_mode = FeatureMode::per_split;
  int mtry = 0;                     // 0 selects ceil(sqrt(P))
  double min_leaf_fraction = 1e-9;  // child weight floor, as a fraction of the root weight
  double lambda = 0.2;
  bool use_sample_weights = true;
  bool use_sample_probs = true;
  std::uint64_t seed = 0;

  int resolved_mtry(std::size_t n_features) const;
  // Throws std::invalid_argument when a knob is out of range for P features.
  void validate(std::size_t n_features) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Split nodes have feature >= 0 and both children set; leaves have feature == -1.
// Every node records its weighted class-1 fraction, total weight and Gini
// impurity; split nodes also record the impurity decrease of their split.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p1 = 0.0;
  double weight = 0.0;
  double impurity = 0.0;
  double gain = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class TreeModel {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<int> feature_subset;
  int depth_limit = 0;
  std::size_t n_features = 0;

  // Rows go left when x[feature] < threshold.
  double predict(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;

  // Pre-order traversal: visit(node_index, depth).
  template <typename Visit>
  void traverse(Visit&& visit) const {
    if (nodes.empty()) return;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [idx, d] = stack.back();
      stack.pop_back();
      visit(idx, d);
      const auto& n = nodes[static_cast<std::size_t>(idx)];
      if (!n.is_leaf()) {
        stack.emplace_back(n.right, d + 1);
        stack.emplace_back(n.left, d + 1);
      }
    }
  }

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

// 1 - (w1/W)^2 - (w0/W)^2. Throws std::invalid_argument when w1 + w0 <= 0.
double weighted_gini(double w1, double w0);

struct SplitCandidate {
  int feature;
  double threshold;
  double gain;
};

// Gains at or below this are treated as "no split"; it is also the tolerance
// under which two gains count as tied.
inline constexpr double kMinSplitGain = 1e-12;

// Exhaustive best split over the candidate features. Thresholds sit at the
// midpoints between consecutive distinct values (rows with zero weight are
// ignored); the gain is the weighted impurity decrease. Ties go to the lower
// feature index, then the lower threshold. Returns nullopt when no split beats
// kMinSplitGain or when every split leaves a child below min_leaf_weight.
std::optional<SplitCandidate> best_split(std::span<const std::size_t> rows, const FeatureMatrix& x,
                                         std::span<const std::uint8_t> y, std::span<const double> w,
                                         std::span<const int> candidate_features,
                                         double min_leaf_weight = 0.0);

// Column-sorted view of a feature matrix, shared by all trees of a forest.
class PresortedColumns {
 public:
  explicit PresortedColumns(const FeatureMatrix& x);
  std::span<const std::uint32_t> order(std::size_t feature) const {
    return {order_.data() + feature * rows_, rows_};
  }
  std::span<const double> column(std::size_t feature) const {
    return {columns_.data() + feature * rows_, rows_};
  }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint32_t> order_;  // per feature: row indices by (value, row)
  std::vector<double> columns_;       // column-major copy of x
};

// Greedy depth-limited induction on all rows of x with per-row weights w.
// A row with weight c behaves exactly like c copies of a unit-weight row.
TreeModel fit_tree(const FeatureMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w,
                   const TrainConfig& config, Rng& rng);
TreeModel fit_tree(const PresortedColumns& sorted, std::span<const std::uint8_t> y,
                   std::span<const double> w, const TrainConfig& config, Rng& rng);

// Throws std::invalid_argument when x has the wrong number of features.
double predict_tree(const TreeModel& tree, std::span<const double> x);

// Per-feature sum of split gains, normalized to sum to 1 (all zeros for a single leaf).
std::vector<double> tree_mdi(const TreeModel& tree);

}  // namespace erforest
