#include "erf/enhanced.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "erf/error.hpp"
#include "erf/hash.hpp"
#include "erf/metrics.hpp"

namespace erforest {

void StoppingRule::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
}

std::vector<double> update_weights(std::span<const double> w, std::span<const double> p,
                                   std::span<const std::uint8_t> y, double t, double lambda) {
  if (w.size() != p.size() || w.size() != y.size()) {
    throw std::invalid_argument("update_weights: w, p and y differ in length");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("update_weights: lambda must be >= 0");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("update_weights: threshold outside [0, 1]");
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double step = y[i] ? t - p[i] : p[i] - t;
    out[i] = std::max(0.0, w[i] + lambda * step);
  }
  return out;
}

std::vector<double> normalize_probs(std::span<const double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw TrainingError("normalize_probs: every sample weight is zero");
  std::vector<double> s(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) s[i] = w[i] / total;
  return s;
}

EnhancedModel train_enhanced(const Dataset& train, const Dataset& val, const TrainConfig& config,
                             const StoppingRule& stopping, unsigned threads) {
  stopping.validate();
  config.validate(train.cols());
  train.require_both_classes("training set");
  val.require_both_classes("validation set");
  if (val.cols() != train.cols()) throw DataError("validation set has a different number of features");

  const std::size_t n = train.rows();
  SampleState state{std::vector<double>(n, 1.0), {}, 0};
  state.probs = normalize_probs(state.weights);

  EnhancedModel model;
  model.config = config;
  model.stopping = stopping;
  double best_auc = -std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int it = 0; it < stopping.max_iterations; ++it) {
    TrainConfig iter_config = config;
    if (it > 0) iter_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(it));
    ForestModel forest = fit_forest(train, state.weights, state.probs, iter_config, threads);
    forest.config = config;

    const auto train_pred = forest.predict(train.features);
    const auto val_pred = forest.predict(val.features);
    IterationRecord rec;
    rec.iteration = it;
    rec.threshold = youden_threshold(train_pred, train.labels);
    rec.train_auc = auc(train_pred, train.labels);
    rec.val_auc = auc(val_pred, val.labels);
    rec.weight_digest = digest(state.weights);
    rec.train_prediction_digest = digest(train_pred);
    model.history.push_back(rec);

    auto next_w = update_weights(state.weights, train_pred, train.labels, rec.threshold, config.lambda);
    double total = 0.0;
    for (double v : next_w) total += v;
    const bool collapsed = !(total > 0.0);

    if (rec.val_auc > best_auc) {
      best_auc = rec.val_auc;
      since_best = 0;
      model.forest = std::move(forest);
      model.threshold = rec.threshold;
      model.best_iteration = it;
      model.sample_state = collapsed ? state : SampleState{next_w, normalize_probs(next_w), it + 1};
    } else {
      ++since_best;
    }
    if (collapsed) {
      model.weight_collapse = true;
      break;
    }
    state.weights = std::move(next_w);
    state.probs = normalize_probs(state.weights);
    state.iteration = it + 1;
    if (since_best >= stopping.patience) break;
  }
  return model;
}

void write_history_jsonl(std::ostream& out, std::span<const IterationRecord> history) {
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf,
                  "{\"iteration\":%d,\"threshold\":%s,\"train_auc\":%s,\"val_auc\":%s,"
                  "\"weight_digest\":\"%016" PRIx64 "\",\"train_prediction_digest\":\"%016" PRIx64 "\"}\n",
                  r.iteration, format_number(r.threshold).c_str(), format_number(r.train_auc).c_str(),
                  format_number(r.val_auc).c_str(), r.weight_digest, r.train_prediction_digest);
    out << buf;
  }
}

}  // namespace erforest
