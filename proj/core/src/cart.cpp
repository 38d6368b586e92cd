#include "erf/cart.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "erf/error.hpp"

namespace erforest {

int TrainConfig::resolved_mtry(std::size_t n_features) const {
  if (mtry > 0) return mtry;
  int m = 1;
  while (static_cast<std::size_t>(m) * static_cast<std::size_t>(m) < n_features) ++m;
  return m;
}

void TrainConfig::validate(std::size_t n_features) const {
  if (n_trees < 1) throw std::invalid_argument("TrainConfig: n_trees must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("TrainConfig: max_depth must be >= 1");
  if (n_features == 0) throw std::invalid_argument("TrainConfig: dataset has no features");
  const int m = resolved_mtry(n_features);
  if (m < 1 || static_cast<std::size_t>(m) > n_features) {
    throw std::invalid_argument("TrainConfig: mtry must lie in [1, P], got " + std::to_string(m));
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
  if (!(min_leaf_fraction >= 0.0 && min_leaf_fraction < 1.0)) {
    throw std::invalid_argument("TrainConfig: min_leaf_fraction must lie in [0, 1)");
  }
}

double TreeModel::predict(std::span<const double> x) const {
  std::size_t at = 0;
  for (;;) {
    const TreeNode& n = nodes[at];
    if (n.is_leaf()) return n.p1;
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
}

int TreeModel::depth() const {
  int deepest = 0;
  traverse([&](int, int d) { deepest = std::max(deepest, d); });
  return deepest;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(),
                                                [](const TreeNode& n) { return n.is_leaf(); }));
}

double weighted_gini(double w1, double w0) {
  const double total = w1 + w0;
  if (!(total > 0.0)) throw std::invalid_argument("weighted_gini: total weight must be positive");
  const double p1 = w1 / total;
  const double p0 = w0 / total;
  return 1.0 - p1 * p1 - p0 * p0;
}

namespace {

double gini_unchecked(double w1, double total) {
  const double p1 = w1 / total;
  const double p0 = (total - w1) / total;
  return 1.0 - p1 * p1 - p0 * p0;
}

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Keep lo < threshold <= hi so that lo routes left and hi routes right.
  return (mid > lo && mid <= hi) ? mid : hi;
}

struct NodeTotals {
  double weight = 0.0;
  double weight1 = 0.0;
};

// Best threshold on one feature. `sorted_rows` holds the node's positive-weight
// rows in ascending (value, row) order and `value(row)` reads the feature.
// Updates `best` when this feature beats it by more than kMinSplitGain.
template <typename Value>
void scan_feature(int feature, std::span<const std::uint32_t> sorted_rows, Value&& value,
                  std::span<const std::uint8_t> y, std::span<const double> w, const NodeTotals& node,
                  double parent_impurity, double min_leaf_weight, std::optional<SplitCandidate>& best) {
  double wl = 0.0;
  double w1l = 0.0;
  const std::size_t n = sorted_rows.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::uint32_t r = sorted_rows[i];
    wl += w[r];
    if (y[r]) w1l += w[r];
    const double v = value(r);
    const double next = value(sorted_rows[i + 1]);
    if (!(v < next)) continue;
    const double wr = node.weight - wl;
    if (wl < min_leaf_weight || wr < min_leaf_weight || !(wl > 0.0) || !(wr > 0.0)) continue;
    const double w1r = std::clamp(node.weight1 - w1l, 0.0, wr);
    const double il = gini_unchecked(std::min(w1l, wl), wl);
    const double ir = gini_unchecked(w1r, wr);
    const double gain = parent_impurity - (wl / node.weight) * il - (wr / node.weight) * ir;
    const double bar = best ? best->gain + kMinSplitGain : kMinSplitGain;
    if (gain > bar) best = SplitCandidate{feature, midpoint(v, next), gain};
  }
}

void check_inputs(std::size_t rows, std::span<const std::uint8_t> y, std::span<const double> w) {
  if (y.size() != rows || w.size() != rows) {
    throw std::invalid_argument("cart: labels/weights length does not match the feature matrix");
  }
}

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const std::size_t> rows, const FeatureMatrix& x,
                                         std::span<const std::uint8_t> y, std::span<const double> w,
                                         std::span<const int> candidate_features,
                                         double min_leaf_weight) {
  check_inputs(x.rows(), y, w);
  std::vector<std::uint32_t> active;
  NodeTotals totals;
  for (std::size_t r : rows) {
    if (!(w[r] > 0.0)) continue;
    active.push_back(static_cast<std::uint32_t>(r));
  }
  std::sort(active.begin(), active.end());
  for (std::uint32_t r : active) {
    totals.weight += w[r];
    if (y[r]) totals.weight1 += w[r];
  }
  if (active.size() < 2) return std::nullopt;
  const double parent = gini_unchecked(totals.weight1, totals.weight);

  std::vector<int> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());
  std::optional<SplitCandidate> best;
  std::vector<std::uint32_t> sorted = active;
  for (int f : features) {
    const auto col = static_cast<std::size_t>(f);
    auto value = [&](std::uint32_t r) { return x(r, col); };
    std::sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = value(a);
      const double vb = value(b);
      return va < vb || (va == vb && a < b);
    });
    scan_feature(f, sorted, value, y, w, totals, parent, min_leaf_weight, best);
  }
  return best;
}

PresortedColumns::PresortedColumns(const FeatureMatrix& x)
    : rows_(x.rows()), cols_(x.cols()), order_(x.rows() * x.cols()), columns_(x.rows() * x.cols()) {
  for (std::size_t f = 0; f < cols_; ++f) {
    double* col = columns_.data() + f * rows_;
    for (std::size_t r = 0; r < rows_; ++r) col[r] = x(r, f);
    auto* ord = order_.data() + f * rows_;
    std::iota(ord, ord + rows_, std::uint32_t{0});
    std::sort(ord, ord + rows_, [col](std::uint32_t a, std::uint32_t b) {
      return col[a] < col[b] || (col[a] == col[b] && a < b);
    });
  }
}

namespace {

// Recursive builder. All per-feature row lists share the same node ranges:
// the rows of a node occupy [begin, end) in every list, each list sorted by
// its own feature.
class TreeBuilder {
 public:
  TreeBuilder(const PresortedColumns& sorted, std::span<const std::uint8_t> y, std::span<const double> w,
              const TrainConfig& config, Rng& rng, TreeModel& tree)
      : sorted_(sorted), y_(y), w_(w), config_(config), rng_(rng), tree_(tree),
        goes_left_(sorted.rows(), 0) {}

  void build() {
    const std::size_t p = sorted_.cols();
    const int mtry = config_.resolved_mtry(p);
    if (config_.feature_mode == FeatureMode::per_tree) {
      tree_.feature_subset = draw_features(mtry);
    } else {
      tree_.feature_subset.resize(p);
      std::iota(tree_.feature_subset.begin(), tree_.feature_subset.end(), 0);
    }
    mtry_ = mtry;
    active_ = tree_.feature_subset;

    // Keep only positive-weight rows.
    lists_.resize(active_.size());
    for (std::size_t k = 0; k < active_.size(); ++k) {
      auto ord = sorted_.order(static_cast<std::size_t>(active_[k]));
      auto& list = lists_[k];
      list.reserve(ord.size());
      for (std::uint32_t r : ord) {
        if (w_[r] > 0.0) list.push_back(r);
      }
    }
    const std::size_t n = lists_.front().size();
    if (n == 0) throw TrainingError("fit_tree: every sample weight is zero");
    scratch_.resize(n);

    double root_weight = 0.0;
    for (std::uint32_t r : lists_.front()) root_weight += w_[r];
    min_leaf_weight_ = config_.min_leaf_fraction * root_weight;
    build_node(0, n, 0);
  }

 private:
  std::vector<int> draw_features(int count) {
    const std::size_t p = sorted_.cols();
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
      std::swap(all[i], all[i + rng_.below(p - i)]);
    }
    all.resize(static_cast<std::size_t>(count));
    std::sort(all.begin(), all.end());
    return all;
  }

  int build_node(std::size_t begin, std::size_t end, int depth) {
    NodeTotals totals;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t r = lists_.front()[i];
      totals.weight += w_[r];
      if (y_[r]) totals.weight1 += w_[r];
    }
    const int index = static_cast<int>(tree_.nodes.size());
    TreeNode node;
    node.weight = totals.weight;
    node.p1 = std::clamp(totals.weight1 / totals.weight, 0.0, 1.0);
    node.impurity = std::max(0.0, gini_unchecked(totals.weight1, totals.weight));
    tree_.nodes.push_back(node);

    if (depth >= config_.max_depth || node.impurity <= 0.0 || end - begin < 2) return index;

    std::vector<int> candidates =
        config_.feature_mode == FeatureMode::per_tree ? active_ : draw_features(mtry_);
    std::optional<SplitCandidate> best;
    for (int f : candidates) {
      const std::size_t k = list_slot(f);
      const auto col = sorted_.column(static_cast<std::size_t>(f));
      scan_feature(f, std::span<const std::uint32_t>(lists_[k].data() + begin, end - begin),
                   [&](std::uint32_t r) { return col[r]; }, y_, w_, totals, node.impurity,
                   min_leaf_weight_, best);
    }
    if (!best) return index;

    const auto col = sorted_.column(static_cast<std::size_t>(best->feature));
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t r = lists_.front()[i];
      goes_left_[r] = col[r] < best->threshold ? 1 : 0;
      n_left += goes_left_[r];
    }
    for (auto& list : lists_) {
      // Stable partition through the scratch buffer keeps each list sorted.
      std::size_t l = begin;
      std::size_t rpos = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t r = list[i];
        if (goes_left_[r]) {
          list[l++] = r;
        } else {
          scratch_[rpos++] = r;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(rpos),
                list.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const int left = build_node(begin, begin + n_left, depth + 1);
    const int right = build_node(begin + n_left, end, depth + 1);
    TreeNode& self = tree_.nodes[static_cast<std::size_t>(index)];
    self.feature = best->feature;
    self.threshold = best->threshold;
    self.gain = best->gain;
    self.left = left;
    self.right = right;
    return index;
  }

  std::size_t list_slot(int feature) const {
    if (config_.feature_mode == FeatureMode::per_split) return static_cast<std::size_t>(feature);
    auto it = std::lower_bound(active_.begin(), active_.end(), feature);
    return static_cast<std::size_t>(it - active_.begin());
  }

  const PresortedColumns& sorted_;
  std::span<const std::uint8_t> y_;
  std::span<const double> w_;
  const TrainConfig& config_;
  Rng& rng_;
  TreeModel& tree_;
  int mtry_ = 1;
  double min_leaf_weight_ = 0.0;
  std::vector<int> active_;
  std::vector<std::vector<std::uint32_t>> lists_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint8_t> goes_left_;
};

}  // namespace

TreeModel fit_tree(const PresortedColumns& sorted, std::span<const std::uint8_t> y,
                   std::span<const double> w, const TrainConfig& config, Rng& rng) {
  check_inputs(sorted.rows(), y, w);
  config.validate(sorted.cols());
  for (double v : w) {
    if (!(v >= 0.0)) throw std::invalid_argument("fit_tree: weights must be non-negative");
  }
  TreeModel tree;
  tree.depth_limit = config.max_depth;
  tree.n_features = sorted.cols();
  TreeBuilder(sorted, y, w, config, rng, tree).build();
  return tree;
}

TreeModel fit_tree(const FeatureMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w,
                   const TrainConfig& config, Rng& rng) {
  check_inputs(x.rows(), y, w);
  return fit_tree(PresortedColumns(x), y, w, config, rng);
}

double predict_tree(const TreeModel& tree, std::span<const double> x) {
  if (x.size() != tree.n_features) {
    throw std::invalid_argument("predict_tree: expected " + std::to_string(tree.n_features) +
                                " features, got " + std::to_string(x.size()));
  }
  return tree.predict(x);
}

std::vector<double> tree_mdi(const TreeModel& tree) {
  std::vector<double> importance(tree.n_features, 0.0);
  for (const auto& n : tree.nodes) {
    if (!n.is_leaf()) importance[static_cast<std::size_t>(n.feature)] += n.gain;
  }
  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (total > 0.0) {
    for (double& v : importance) v /= total;
  }
  return importance;
}

}  // namespace erforest
