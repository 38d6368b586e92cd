#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "erf/cart.hpp"
#include "erf/dataset.hpp"
#include "erf/random.hpp"

namespace erforest {

struct ForestModel {
  std::vector<TreeModel> trees;
  TrainConfig config;
  std::vector<std::int64_t> training_row_ids;
  // Per tree, the N bootstrap draws (row indices into the training set) in
  // draw order. Kept for auditing; not persisted in model archives.
  std::vector<std::vector<std::uint32_t>> bootstrap_log;
  std::size_t n_features = 0;

  // Uniform average of the per-tree class-1 probabilities.
  double predict(std::span<const double> x) const;
  std::vector<double> predict(const FeatureMatrix& x) const;
  // Per-tree probabilities for one row.
  std::vector<double> predict_trees(std::span<const double> x) const;
};

// n draws with replacement from the categorical distribution `probs`
// (inverse CDF over the cumulative sums). A uniform `probs` takes exactly the
// same path as uniform_bootstrap, so both produce identical draws for the
// same generator state. Throws std::invalid_argument on an invalid distribution.
std::vector<std::uint32_t> bootstrap_indices(std::size_t n, std::span<const double> probs, Rng& rng);

// Classic bootstrap: n uniform draws with replacement.
std::vector<std::uint32_t> uniform_bootstrap(std::size_t n, Rng& rng);

// Trains config.n_trees trees. Tree k uses its own generator seeded with
// derive_seed(config.seed, k): it draws its bootstrap sample (from `probs`
// when use_sample_probs is set, uniformly otherwise) and then induces a tree
// where each drawn row carries weights[i] (use_sample_weights) or 1. The
// result does not depend on `threads`.
ForestModel fit_forest(const Dataset& train, std::span<const double> weights,
                       std::span<const double> probs, const TrainConfig& config, unsigned threads = 1);

double predict_forest(const ForestModel& forest, std::span<const double> x);

// Mean of the per-tree normalized MDI vectors.
std::vector<double> forest_mdi(const ForestModel& forest);

}  // namespace erforest
