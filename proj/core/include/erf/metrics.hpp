#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace erforest {

struct RocPoint {
  double threshold;
  double tpr;
  double fpr;
};

// ROC points for the rule "predict 1 iff score >= threshold", ordered by
// descending threshold. Thresholds are the distinct scores plus a leading
// +infinity sentinel (tpr = fpr = 0). Throws DataError on single-class labels.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Mann-Whitney estimate of P(score_pos > score_neg), ties counted as 1/2.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct YoudenResult {
  double threshold;
  double j;  // TPR - FPR at threshold
};

// Threshold maximizing TPR - FPR over the observed scores. Among equal
// maxima the smallest threshold wins.
YoudenResult youden(std::span<const double> scores, std::span<const std::uint8_t> labels);

inline double youden_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  return youden(scores, labels).threshold;
}

}  // namespace erforest
