#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "erf/dataset.hpp"
#include "erf/enhanced.hpp"

namespace erforest {

struct CleaningConfig {
  bool sample_cleaning = true;
  bool feature_cleaning = true;
  int n_buckets = 10;
  double l = 0.1;
  int max_iterations = 70;
  double early_stop_drop = 0.01;  // relative drop below the best val AUC that ends the loop

  void validate() const;
};

struct BucketDiscard {
  Dataset data;
  SampleState state;  // surviving entries, probabilities renormalized
  std::vector<std::int64_t> removed_row_ids;
};

// Sorts rows by state.probs descending (ties: ascending row_id), cuts the
// order into n_buckets contiguous buckets whose sizes differ by at most one
// (larger buckets on top) and drops the bottom bucket. Throws DataError when
// there are fewer rows than buckets.
BucketDiscard discard_lowest_bucket(const SampleState& state, const Dataset& data, int n_buckets);

struct FeaturePrune {
  Dataset data;
  std::vector<std::string> removed_columns;
  bool degenerate = false;  // every importance was zero, nothing removed
};

// Drops every column whose importance is strictly below l * max(importances).
FeaturePrune prune_features(const Dataset& data, std::span<const double> importances, double l);

struct CleaningIteration {
  int iteration = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double val_auc = 0.0;
  double test_auc = 0.0;  // NaN without a test set
  // Removed after this iteration's model was scored.
  std::vector<std::int64_t> removed_row_ids;
  std::vector<std::string> removed_columns;
};

struct CleaningReport {
  std::vector<CleaningIteration> iterations;
  int best_iteration = 0;
  std::size_t original_rows = 0;
  std::size_t original_cols = 0;
  std::size_t final_rows = 0;
  std::size_t final_cols = 0;
  double feature_reduction_pct = 0.0;
  double sample_reduction_pct = 0.0;
  // 100 (auc_best - auc_0) / auc_0, on the test set when one is supplied and
  // on the validation set otherwise.
  double relative_auc_diff_pct = 0.0;
  bool feature_warning = false;

  // Every row id / column removed between the original data and the best iteration.
  std::vector<std::int64_t> removed_row_ids() const;
  std::vector<std::string> removed_columns() const;
};

struct CleaningResult {
  CleaningReport report;
  Dataset cleaned;      // training data as it stood at the best iteration
  EnhancedModel model;  // model trained on `cleaned`
};

// Repeats: train the reweighted forest on the current data, score val (and
// test), stop if val AUC fell below (1 - early_stop_drop) * best, otherwise
// drop the lowest sample bucket and/or the weak features. The loop also ends
// when nothing was removed, since the next iteration would repeat this one.
CleaningResult clean_loop(const Dataset& train, const Dataset& val, const TrainConfig& config,
                          const StoppingRule& stopping, const CleaningConfig& cleaning,
                          const Dataset* test = nullptr, unsigned threads = 1);

// Summary table (relative AUC diff, feature and sample reduction) followed by
// one line per iteration.
void write_cleaning_report(std::ostream& out, const CleaningReport& report);

}  // namespace erforest
