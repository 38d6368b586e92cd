#include "erf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "erf/error.hpp"

namespace erforest {

namespace {

struct ClassCounts {
  std::int64_t pos = 0;
  std::int64_t neg = 0;
};

ClassCounts checked_counts(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           const char* what) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument(std::string(what) + ": scores and labels differ in length");
  }
  ClassCounts c;
  for (auto y : labels) (y ? c.pos : c.neg) += 1;
  if (c.pos == 0 || c.neg == 0) throw DataError(std::string(what) + ": both classes must be present");
  return c;
}

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

// Cumulative confusion counts after admitting every score >= threshold.
struct Step {
  double threshold;
  std::int64_t tp;
  std::int64_t fp;
};

std::vector<Step> threshold_steps(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  auto order = order_by_score_desc(scores);
  std::vector<Step> steps;
  steps.push_back({std::numeric_limits<double>::infinity(), 0, 0});
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    steps.push_back({s, tp, fp});
  }
  return steps;
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto counts = checked_counts(scores, labels, "roc_curve");
  std::vector<RocPoint> out;
  for (const auto& st : threshold_steps(scores, labels)) {
    out.push_back({st.threshold, static_cast<double>(st.tp) / static_cast<double>(counts.pos),
                   static_cast<double>(st.fp) / static_cast<double>(counts.neg)});
  }
  return out;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto counts = checked_counts(scores, labels, "auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of mid-ranks (1-based) of the positives; tied blocks share their average rank.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t pos_in_block = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      pos_in_block += labels[order[j]];
      ++j;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += mid_rank * static_cast<double>(pos_in_block);
    i = j;
  }
  const double np = static_cast<double>(counts.pos);
  const double nn = static_cast<double>(counts.neg);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

YoudenResult youden(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto counts = checked_counts(scores, labels, "youden");
  const auto steps = threshold_steps(scores, labels);
  // J = tp/P - fp/N is compared through the exact integer numerator tp*N - fp*P.
  std::int64_t best_num = std::numeric_limits<std::int64_t>::min();
  double best_t = 0.0;
  for (const auto& st : steps) {
    if (std::isinf(st.threshold)) continue;
    const std::int64_t num = st.tp * counts.neg - st.fp * counts.pos;
    // Steps run from high to low thresholds, so >= keeps the smallest maximizer.
    if (num >= best_num) {
      best_num = num;
      best_t = st.threshold;
    }
  }
  return {best_t, static_cast<double>(best_num) / static_cast<double>(counts.pos * counts.neg)};
}

}  // namespace erforest
