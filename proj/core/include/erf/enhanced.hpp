#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "erf/cart.hpp"
#include "erf/dataset.hpp"
#include "erf/forest.hpp"

namespace erforest {

struct StoppingRule {
  int max_iterations = 20;
  int patience = 3;  // iterations without a strict val-AUC improvement before stopping

  void validate() const;
  friend bool operator==(const StoppingRule&, const StoppingRule&) = default;
};

struct SampleState {
  std::vector<double> weights;
  std::vector<double> probs;
  int iteration = 0;
};

struct IterationRecord {
  int iteration = 0;
  double threshold = 0.0;
  double train_auc = 0.0;
  double val_auc = 0.0;
  std::uint64_t weight_digest = 0;            // weights the forest was fitted with
  std::uint64_t train_prediction_digest = 0;  // forest predictions on the training rows

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct EnhancedModel {
  ForestModel forest;  // best iterate by validation AUC
  double threshold = 0.5;
  std::vector<IterationRecord> history;
  TrainConfig config;
  StoppingRule stopping;
  int best_iteration = 0;
  // Weights and probabilities produced by the update that followed the best
  // iterate; these are the sample importances used by cleaning.
  SampleState sample_state;
  bool weight_collapse = false;

  const IterationRecord& best_record() const { return history.at(static_cast<std::size_t>(best_iteration)); }
};

// w'_i = max(0, w_i + lambda (t - p_i)) for y_i = 1 and max(0, w_i + lambda (p_i - t)) for y_i = 0.
std::vector<double> update_weights(std::span<const double> w, std::span<const double> p,
                                   std::span<const std::uint8_t> y, double t, double lambda);

// s = w / sum(w). Throws TrainingError when every weight is zero.
std::vector<double> normalize_probs(std::span<const double> w);

// The reweighting loop. Iteration 0 trains with config.seed; iteration i > 0
// with derive_seed(config.seed, i). Each iteration fits a forest on the
// current (w, s), thresholds its training-set predictions at the Youden
// optimum, scores the validation set, and updates the weights. Returns the
// iterate with the highest validation AUC (earliest on ties).
EnhancedModel train_enhanced(const Dataset& train, const Dataset& val, const TrainConfig& config,
                             const StoppingRule& stopping = {}, unsigned threads = 1);

// One JSON object per line: iteration, threshold, train_auc, val_auc and the two digests.
void write_history_jsonl(std::ostream& out, std::span<const IterationRecord> history);

struct Preset {
  std::string_view name;
  bool sample_probs;
  bool sample_weights;
  bool per_tree_features;
  int max_depth;
  double lambda;

  TrainConfig apply(TrainConfig base) const;
};

std::span<const Preset> presets();
std::optional<Preset> find_preset(std::string_view name);

}  // namespace erforest
