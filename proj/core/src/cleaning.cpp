#include "erf/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "erf/error.hpp"
#include "erf/forest.hpp"
#include "erf/metrics.hpp"

namespace erforest {

void CleaningConfig::validate() const {
  if (n_buckets < 2) throw std::invalid_argument("n_buckets must be >= 2");
  if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("l must lie in (0, 1)");
  if (max_iterations < 1) throw std::invalid_argument("cleaning max_iterations must be >= 1");
  if (!(early_stop_drop >= 0.0 && early_stop_drop < 1.0)) {
    throw std::invalid_argument("early_stop_drop must lie in [0, 1)");
  }
}

BucketDiscard discard_lowest_bucket(const SampleState& state, const Dataset& data, int n_buckets) {
  const std::size_t n = data.rows();
  if (state.probs.size() != n) throw std::invalid_argument("discard_lowest_bucket: state does not match data");
  if (n_buckets < 1) throw std::invalid_argument("discard_lowest_bucket: n_buckets must be positive");
  const auto buckets = static_cast<std::size_t>(n_buckets);
  if (n < buckets) {
    throw DataError("discard_lowest_bucket: " + std::to_string(n) + " rows cannot fill " +
                    std::to_string(buckets) + " buckets");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (state.probs[a] != state.probs[b]) return state.probs[a] > state.probs[b];
    return data.row_ids[a] < data.row_ids[b];
  });
  // The remainder n % buckets goes to the top buckets, so the bottom one has floor(n / buckets) rows.
  const std::size_t drop = n / buckets;
  std::vector<std::size_t> keep(order.begin(), order.end() - static_cast<std::ptrdiff_t>(drop));
  std::sort(keep.begin(), keep.end());

  BucketDiscard out;
  for (auto it = order.end() - static_cast<std::ptrdiff_t>(drop); it != order.end(); ++it) {
    out.removed_row_ids.push_back(data.row_ids[*it]);
  }
  std::sort(out.removed_row_ids.begin(), out.removed_row_ids.end());
  out.data = data.select_rows(keep);
  out.state.iteration = state.iteration;
  for (std::size_t i : keep) out.state.weights.push_back(state.weights.empty() ? state.probs[i] : state.weights[i]);
  double total = 0.0;
  for (double w : out.state.weights) total += w;
  out.state.probs = out.state.weights;
  if (total > 0.0) {
    for (double& s : out.state.probs) s /= total;
  }
  return out;
}

FeaturePrune prune_features(const Dataset& data, std::span<const double> importances, double l) {
  if (importances.size() != data.cols()) throw std::invalid_argument("prune_features: one importance per column");
  FeaturePrune out;
  double top = 0.0;
  for (double v : importances) {
    if (!(v >= 0.0)) throw std::invalid_argument("prune_features: importances must be non-negative");
    top = std::max(top, v);
  }
  if (top <= 0.0) {
    out.data = data;
    out.degenerate = true;
    return out;
  }
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < importances.size(); ++j) {
    if (importances[j] < l * top) {
      out.removed_columns.push_back(data.column_names[j]);
    } else {
      keep.push_back(j);
    }
  }
  out.data = data.keep_columns(keep);
  return out;
}

std::vector<std::int64_t> CleaningReport::removed_row_ids() const {
  std::vector<std::int64_t> ids;
  for (int i = 0; i < best_iteration; ++i) {
    const auto& r = iterations[static_cast<std::size_t>(i)].removed_row_ids;
    ids.insert(ids.end(), r.begin(), r.end());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> CleaningReport::removed_columns() const {
  std::vector<std::string> cols;
  for (int i = 0; i < best_iteration; ++i) {
    const auto& c = iterations[static_cast<std::size_t>(i)].removed_columns;
    cols.insert(cols.end(), c.begin(), c.end());
  }
  return cols;
}

CleaningResult clean_loop(const Dataset& train, const Dataset& val, const TrainConfig& config,
                          const StoppingRule& stopping, const CleaningConfig& cleaning, const Dataset* test,
                          unsigned threads) {
  cleaning.validate();
  CleaningResult result;
  auto& report = result.report;
  report.original_rows = train.rows();
  report.original_cols = train.cols();

  Dataset current = train;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < cleaning.max_iterations; ++it) {
    const Dataset cur_val = val.keep_columns(std::span<const std::string>(current.column_names));
    EnhancedModel model = train_enhanced(current, cur_val, config, stopping, threads);

    CleaningIteration rec;
    rec.iteration = it;
    rec.rows = current.rows();
    rec.cols = current.cols();
    rec.val_auc = model.best_record().val_auc;
    rec.test_auc = std::numeric_limits<double>::quiet_NaN();
    if (test) {
      const Dataset cur_test = test->keep_columns(std::span<const std::string>(current.column_names));
      rec.test_auc = auc(model.forest.predict(cur_test.features), cur_test.labels);
    }
    report.iterations.push_back(rec);
    auto& logged = report.iterations.back();

    if (rec.val_auc > best_val) {
      best_val = rec.val_auc;
      report.best_iteration = it;
      result.cleaned = current;
      result.model = std::move(model);
    } else if (rec.val_auc < (1.0 - cleaning.early_stop_drop) * best_val) {
      break;
    }
    if (it + 1 == cleaning.max_iterations) break;

    // The importances come from this iteration's model, which is not
    // necessarily the best one retained above.
    const EnhancedModel& scored = report.best_iteration == it ? result.model : model;
    Dataset next = current;
    if (cleaning.sample_cleaning) {
      if (next.rows() < static_cast<std::size_t>(cleaning.n_buckets) * 2) break;
      auto discarded = discard_lowest_bucket(scored.sample_state, next, cleaning.n_buckets);
      const std::size_t pos = discarded.data.count_positive();
      if (pos == 0 || pos == discarded.data.rows()) break;
      logged.removed_row_ids = std::move(discarded.removed_row_ids);
      next = std::move(discarded.data);
    }
    if (cleaning.feature_cleaning) {
      auto pruned = prune_features(next, forest_mdi(scored.forest), cleaning.l);
      report.feature_warning = report.feature_warning || pruned.degenerate;
      logged.removed_columns = std::move(pruned.removed_columns);
      next = std::move(pruned.data);
    }
    if (logged.removed_row_ids.empty() && logged.removed_columns.empty()) break;
    current = std::move(next);
  }

  const auto& first = report.iterations.front();
  const auto& best = report.iterations[static_cast<std::size_t>(report.best_iteration)];
  report.final_rows = result.cleaned.rows();
  report.final_cols = result.cleaned.cols();
  report.sample_reduction_pct =
      100.0 * static_cast<double>(report.original_rows - report.final_rows) / static_cast<double>(report.original_rows);
  report.feature_reduction_pct =
      100.0 * static_cast<double>(report.original_cols - report.final_cols) / static_cast<double>(report.original_cols);
  const double base = test ? first.test_auc : first.val_auc;
  const double end = test ? best.test_auc : best.val_auc;
  report.relative_auc_diff_pct = 100.0 * (end - base) / base;
  return result;
}

void write_cleaning_report(std::ostream& out, const CleaningReport& report) {
  char buf[160];
  out << "relative_auc_diff_pct,feature_reduction_pct,sample_reduction_pct\n";
  std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f\n", report.relative_auc_diff_pct, report.feature_reduction_pct,
                report.sample_reduction_pct);
  out << buf << '\n';
  out << "iteration,rows,cols,val_auc,test_auc,removed_rows,removed_columns\n";
  for (const auto& it : report.iterations) {
    std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%.4f,", it.iteration, it.rows, it.cols, it.val_auc);
    out << buf;
    if (std::isnan(it.test_auc)) {
      out << "NA";
    } else {
      std::snprintf(buf, sizeof buf, "%.4f", it.test_auc);
      out << buf;
    }
    out << ',' << it.removed_row_ids.size() << ',';
    for (std::size_t j = 0; j < it.removed_columns.size(); ++j) out << (j ? ";" : "") << it.removed_columns[j];
    out << '\n';
  }
  out << "best_iteration," << report.best_iteration << '\n';
}

}  // namespace erforest
