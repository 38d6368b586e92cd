#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erf/cart.hpp"
#include "erf/dataset.hpp"
#include "erf/enhanced.hpp"
#include "erf/weighting.hpp"

namespace erforest {

// One column of the ablation table: which of per-tree features (FT), sample
// weights (SW) and sample probabilities (SP) are on, and whether predictions
// use the neighbor-based tree weights (MW).
struct Mode {
  bool ft = false;
  bool sw = false;
  bool sp = false;
  bool model_weights = false;

  std::string name() const;  // "Initial", "FT", "SW-SP", "FT-SW-SP+MW", ...
  Mode without_weights() const { return {ft, sw, sp, false}; }
  TrainConfig apply(TrainConfig base) const;
  // Without SW or SP the reweighting has no effect, so one iteration suffices.
  StoppingRule stopping(StoppingRule base) const;

  friend bool operator==(const Mode&, const Mode&) = default;
};

// Accepts "Initial", "vanilla", any dash-joined subset of FT/SW/SP in any
// order and case, optionally followed by "+MW".
std::optional<Mode> parse_mode(std::string_view text);
std::vector<Mode> ablation_modes();  // the eight FT/SW/SP combinations

struct BenchmarkSpec {
  TrainConfig base;
  StoppingRule stopping;
  std::vector<Mode> modes;
  int n_seeds = 5;
  int folds = 5;
  double test_fraction = 0.15;
  // Use a single validation fold per seed (fold = seed index mod folds)
  // instead of all folds.
  bool one_fold_per_seed = false;
  std::uint64_t seed = 0;
  std::vector<WeightingParams> grid;  // empty: default_weighting_grid
  unsigned threads = 1;

  void validate() const;
};

struct RunResult {
  Mode mode;
  int seed_index = 0;
  int fold = 0;
  double val_auc = 0.0;
  double test_auc = 0.0;
  // For +MW modes: the chosen (M, L) and the uniform-average test AUC of the same forest.
  std::optional<WeightingParams> weighting;
  double uniform_test_auc = 0.0;
  int iterations = 0;
};

struct ModeSummary {
  Mode mode;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over runs
  std::size_t runs = 0;
};

struct BenchmarkResult {
  std::vector<RunResult> runs;  // ordered by (seed, fold, mode position in spec)
  std::vector<ModeSummary> summary;
};

struct RunSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Stratified hold-out of test_fraction, then the remainder dealt into
// `folds` stratified folds; `fold` is the validation part.
RunSplit benchmark_split(const Dataset& data, double test_fraction, int folds, int fold, std::uint64_t seed);

BenchmarkResult run_benchmark(const Dataset& data, const BenchmarkSpec& spec,
                              const std::function<void(const RunResult&)>& on_run = {});

// A "dataset & auc & auc ..." row per dataset with 4 decimals, preceded by a header line.
void write_benchmark_table(std::ostream& out, std::string_view dataset, const BenchmarkResult& result);
// Per-run test AUC deltas (weighted minus uniform) for every +MW mode.
void write_weighting_deltas(std::ostream& out, const BenchmarkResult& result);

}  // namespace erforest
