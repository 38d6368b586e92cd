#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "erf/cart.hpp"
#include "erf/enhanced.hpp"

namespace erfcli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool quiet = false;
};

// Training knobs as given on the command line; unset fields fall back to the
// preset (if any) and then to the library defaults.
struct TrainFlags {
  std::string preset;
  std::optional<int> trees;
  std::optional<int> max_depth;
  std::optional<double> lambda;
  std::optional<int> mtry;
  std::optional<std::string> feature_mode;
  std::optional<bool> sample_weights;
  std::optional<bool> sample_probs;
  std::optional<int> max_iters;
  std::optional<int> patience;

  erforest::TrainConfig config(std::uint64_t seed) const;
  erforest::StoppingRule stopping() const;
};

struct TrainArgs {
  std::string data;
  std::string label;
  std::string out;
  std::string history;
  std::string val_data;
  double val_fraction = 0.15;
  bool no_neighbors = false;
  TrainFlags flags;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::vector<std::size_t> weighted;  // empty, or {M, L}
};

struct ExplainArgs {
  std::string model;
  std::string data;
  std::string train;
  std::string out;
  std::string dot_dir = ".";
  std::size_t top_k = 1;
  std::size_t m = 10;
  std::size_t l = 10;
};

struct CleanArgs {
  std::string data;
  std::string label;
  std::string out;
  std::string report;
  bool no_sample = false;
  bool no_feature = false;
  int buckets = 10;
  double l = 0.1;
  int max_iters = 70;
  double early_stop = 0.01;
  TrainFlags flags;
};

struct BenchmarkArgs {
  std::string data;
  std::string label;
  std::string name;
  std::string modes = "Initial,SW-SP";
  std::string grid;
  std::string runs_out;
  std::string deltas_out;
  int seeds = 5;
  int folds = 5;
  double test_fraction = 0.15;
  bool one_fold_per_seed = false;
  TrainFlags flags;
};

int cmd_train(const GlobalOptions& g, const TrainArgs& a);
int cmd_predict(const GlobalOptions& g, const PredictArgs& a);
int cmd_explain(const GlobalOptions& g, const ExplainArgs& a);
int cmd_clean(const GlobalOptions& g, const CleanArgs& a);
int cmd_benchmark(const GlobalOptions& g, const BenchmarkArgs& a);

}  // namespace erfcli
