#pragma once

// Brute-force reference implementations and random instance generators used
// by the property tests. Everything here is written for clarity, not speed,
// and shares no code with the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "erf/dataset.hpp"

namespace oracle {

// Small deterministic generator for test instances (splitmix64).
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  int range(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double real(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  bool coin(double p = 0.5) { return real() < p; }

 private:
  std::uint64_t s_;
};

// Random dataset: n rows, p columns. With `grid` > 0 feature values are drawn
// from {0, ..., grid-1} so ties occur; otherwise they are continuous.
inline erforest::Dataset random_dataset(Gen& g, std::size_t n, std::size_t p, int grid = 0, bool both_classes = true) {
  erforest::Dataset d;
  d.features = erforest::FeatureMatrix(n, p);
  d.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) d.features(r, c) = grid > 0 ? g.range(0, grid - 1) : g.real(-5.0, 5.0);
    d.labels[r] = g.coin() ? 1 : 0;
  }
  if (both_classes && n >= 2) {
    d.labels[0] = 0;
    d.labels[1] = 1;
  }
  for (std::size_t c = 0; c < p; ++c) d.column_names.push_back("f" + std::to_string(c));
  d.row_ids.resize(n);
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::int64_t{0});
  d.label.column = "y";
  d.label.position = p;
  return d;
}

inline double gini(double w1, double w0) {
  const double w = w1 + w0;
  const double a = w1 / w;
  const double b = w0 / w;
  return 1.0 - a * a - b * b;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};

// Every admissible split (feature, midpoint threshold, gain) over rows with
// positive weight; children recomputed from scratch for each candidate.
inline std::vector<Split> all_splits(const erforest::FeatureMatrix& x, const std::vector<std::uint8_t>& y,
                                     const std::vector<double>& w, const std::vector<int>& features,
                                     double min_leaf = 0.0) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (w[r] > 0.0) rows.push_back(r);
  }
  double w1 = 0, w0 = 0;
  for (auto r : rows) (y[r] ? w1 : w0) += w[r];
  std::vector<Split> out;
  if (w1 + w0 <= 0) return out;
  const double parent = gini(w1, w0);
  for (int f : features) {
    std::set<double> values;
    for (auto r : rows) values.insert(x(r, static_cast<std::size_t>(f)));
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      double t = v[i] + (v[i + 1] - v[i]) / 2.0;
      if (!(t > v[i])) t = v[i + 1];
      double l1 = 0, l0 = 0, r1 = 0, r0 = 0;
      for (auto r : rows) {
        const bool left = x(r, static_cast<std::size_t>(f)) < t;
        if (left) {
          (y[r] ? l1 : l0) += w[r];
        } else {
          (y[r] ? r1 : r0) += w[r];
        }
      }
      if (l1 + l0 < min_leaf || r1 + r0 < min_leaf) continue;
      const double wl = l1 + l0, wr = r1 + r0, wt = wl + wr;
      const double gain = parent - (wl / wt) * gini(l1, l0) - (wr / wt) * gini(r1, r0);
      out.push_back({f, t, gain});
    }
  }
  return out;
}

// Mann-Whitney by explicit pair counting.
inline double auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double num = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      if (s[i] > s[j]) num += 1;
      if (s[i] == s[j]) num += 0.5;
    }
  }
  return num / pairs;
}

// Youden threshold by direct enumeration of the observed scores; J compared
// as the exact integer tp*N - fp*P; the smallest maximizing threshold wins.
inline double youden(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  std::int64_t P = 0, N = 0;
  for (auto v : y) (v ? P : N) += 1;
  std::set<double> thresholds(s.begin(), s.end());
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  double best_t = 0.0;
  for (double t : thresholds) {  // ascending, so strict > keeps the smallest
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp) += 1;
    }
    const std::int64_t j = tp * N - fp * P;
    if (j > best) {
      best = j;
      best_t = t;
    }
  }
  return best_t;
}

// Tree ranking of one training row, written as an explicit selection sort.
inline std::vector<std::size_t> ranking(const std::vector<double>& p, bool positive) {
  std::vector<std::size_t> out;
  std::vector<bool> used(p.size(), false);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::size_t pick = p.size();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (used[i]) continue;
      if (pick == p.size()) {
        pick = i;
        continue;
      }
      const bool better = positive ? p[i] > p[pick] : p[i] < p[pick];
      if (better) pick = i;
    }
    used[pick] = true;
    out.push_back(pick);
  }
  return out;
}

// Appearance counts and rank sums of each tree over neighbors' top-L lists.
struct Appearances {
  std::vector<long> count;
  std::vector<long> rank_sum;
};

inline Appearances appearances(const std::vector<std::vector<std::size_t>>& rankings,
                               const std::vector<std::size_t>& neighbors, std::size_t trees, std::size_t l) {
  Appearances a{std::vector<long>(trees, 0), std::vector<long>(trees, 0)};
  for (std::size_t m : neighbors) {
    for (std::size_t i = 0; i < trees; ++i) {
      for (std::size_t r = 1; r <= l; ++r) {
        if (rankings[m][r - 1] == i) {
          a.count[i] += 1;
          a.rank_sum[i] += static_cast<long>(r);
        }
      }
    }
  }
  return a;
}

inline std::vector<double> normalize(const std::vector<double>& v) {
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  if (hi == lo) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / (hi - lo);
  return out;
}

// Squared Euclidean distance from x to every training row, z-scored with the
// population statistics when `standardize` is set (constant columns skipped).
inline std::vector<double> sq_distances(const erforest::Dataset& train, const std::vector<double>& x,
                                        bool standardize = true) {
  const std::size_t p = train.cols();
  std::vector<double> mean(p, 0), sd(p, 0);
  std::vector<bool> constant(p, true);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t r = 0; r < train.rows(); ++r) {
      mean[c] += train.features(r, c);
      constant[c] = constant[c] && train.features(r, c) == train.features(0, c);
    }
    mean[c] /= static_cast<double>(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) sd[c] += std::pow(train.features(r, c) - mean[c], 2);
    sd[c] = std::sqrt(sd[c] / static_cast<double>(train.rows()));
  }
  std::vector<double> out;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    double s = 0;
    for (std::size_t c = 0; c < p; ++c) {
      if (standardize && constant[c]) continue;
      const double a = standardize ? (train.features(r, c) - mean[c]) / sd[c] : train.features(r, c);
      const double b = standardize ? (x[c] - mean[c]) / sd[c] : x[c];
      s += (a - b) * (a - b);
    }
    out.push_back(s);
  }
  return out;
}

// Full sort of all training rows by (distance, row_id).
inline std::vector<std::size_t> knn(const erforest::Dataset& train, const std::vector<double>& x, std::size_t m,
                                    bool standardize = true) {
  const auto d = sq_distances(train, x, standardize);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d[a] < d[b] || (d[a] == d[b] && train.row_ids[a] < train.row_ids[b]);
  });
  order.resize(m);
  return order;
}

}  // namespace oracle
