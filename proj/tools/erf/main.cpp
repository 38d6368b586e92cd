// erf: train, apply, explain and benchmark enhanced random forests.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad usage, 3 data or model
// archive error, 4 training failure.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <stdexcept>

#include "commands.hpp"
#include "erf/error.hpp"

namespace {

void add_train_flags(CLI::App* cmd, erfcli::TrainFlags& f) {
  cmd->add_option("--preset", f.preset, "Named per-dataset configuration (e.g. gamma, wine)");
  cmd->add_option("--trees", f.trees, "Number of trees (default 200)");
  cmd->add_option("--max-depth", f.max_depth, "Maximum tree depth (default 6)");
  cmd->add_option("--lambda", f.lambda, "Weight update learning rate (default 0.2)");
  cmd->add_option("--mtry", f.mtry, "Candidate features per split or per tree (0: ceil(sqrt(P)))");
  cmd->add_option("--feature-mode", f.feature_mode, "per_split or per_tree");
  cmd->add_option("--sample-weights", f.sample_weights, "Grow trees with the sample weights (true/false)");
  cmd->add_option("--sample-probs", f.sample_probs, "Bootstrap from the selection probabilities (true/false)");
  cmd->add_option("--max-iters", f.max_iters, "Reweighting iterations (default 20)");
  cmd->add_option("--patience", f.patience, "Iterations without val improvement before stopping (default 3)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enhanced random forests for binary classification"};
  app.require_subcommand(1);
  app.fallthrough();

  erfcli::GlobalOptions global;
  app.add_option("--seed", global.seed, "Base random seed");
  app.add_option("--threads", global.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", global.quiet, "Suppress progress and summary output");

  erfcli::TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a model and write its archive");
  c_train->add_option("--data", train.data, "Training CSV")->required();
  c_train->add_option("--label", train.label, "Binary label column")->required();
  c_train->add_option("--out", train.out, "Model archive path")->required();
  c_train->add_option("--history", train.history, "Write the per-iteration log (JSON lines)");
  c_train->add_option("--val-data", train.val_data, "Separate validation CSV (default: hold out part of --data)");
  c_train->add_option("--val-fraction", train.val_fraction, "Held-out validation fraction")
      ->check(CLI::Range(0.0, 1.0));
  c_train->add_flag("--no-neighbors", train.no_neighbors, "Do not store training rows for weighted prediction");
  add_train_flags(c_train, train.flags);

  erfcli::PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Score a CSV with a saved model");
  c_predict->add_option("--model", predict.model, "Model archive")->required();
  c_predict->add_option("--data", predict.data, "CSV to score")->required();
  c_predict->add_option("--out", predict.out, "Output CSV (default stdout)");
  c_predict->add_option("--weighted", predict.weighted, "Neighbor-weighted prediction with M neighbors and top L trees")
      ->expected(2);

  erfcli::ExplainArgs explain;
  auto* c_explain = app.add_subcommand("explain", "Report the most relevant trees for each row");
  c_explain->add_option("--model", explain.model, "Model archive")->required();
  c_explain->add_option("--data", explain.data, "Rows to explain")->required();
  c_explain->add_option("--train", explain.train, "Training CSV, when the archive has no stored rows");
  c_explain->add_option("--out", explain.out, "Report path (default stdout)");
  c_explain->add_option("--dot-dir", explain.dot_dir, "Directory for the per-tree DOT files");
  c_explain->add_option("--top-k", explain.top_k, "Trees reported per row")->check(CLI::PositiveNumber);
  c_explain->add_option("--M", explain.m, "Nearest neighbors")->check(CLI::PositiveNumber);
  c_explain->add_option("--L", explain.l, "Top trees taken from each neighbor")->check(CLI::PositiveNumber);

  erfcli::CleanArgs clean;
  auto* c_clean = app.add_subcommand("clean", "Drop low-importance samples and features");
  c_clean->add_option("--data", clean.data, "Input CSV")->required();
  c_clean->add_option("--label", clean.label, "Binary label column")->required();
  c_clean->add_option("--out", clean.out, "Cleaned CSV (default stdout)");
  c_clean->add_option("--report", clean.report, "Cleaning report path");
  c_clean->add_flag("--no-sample-cleaning", clean.no_sample, "Keep every sample");
  c_clean->add_flag("--no-feature-cleaning", clean.no_feature, "Keep every feature");
  c_clean->add_option("--buckets", clean.buckets, "Sample buckets per iteration (default 10)");
  c_clean->add_option("--l", clean.l, "Feature cut as a fraction of the top importance (default 0.1)");
  c_clean->add_option("--clean-iters", clean.max_iters, "Maximum cleaning iterations (default 70)");
  c_clean->add_option("--early-stop", clean.early_stop, "Relative val AUC drop that stops cleaning (default 0.01)");
  add_train_flags(c_clean, clean.flags);

  erfcli::BenchmarkArgs bench;
  auto* c_bench = app.add_subcommand("benchmark", "Compare configurations over seeded hold-out and CV splits");
  c_bench->add_option("--data", bench.data, "Dataset CSV")->required();
  c_bench->add_option("--label", bench.label, "Binary label column")->required();
  c_bench->add_option("--name", bench.name, "Dataset name in the table (default: file stem)");
  c_bench->add_option("--modes", bench.modes, "Comma list: Initial, FT, SW, SP, FT-SW, ..., optionally +MW");
  c_bench->add_option("--grid", bench.grid, "Comma list of M:L pairs for +MW modes");
  c_bench->add_option("--seeds", bench.seeds, "Seeds (default 5)");
  c_bench->add_option("--folds", bench.folds, "Cross-validation folds (default 5)");
  c_bench->add_option("--test-fraction", bench.test_fraction, "Hold-out test fraction (default 0.15)");
  c_bench->add_flag("--one-fold-per-seed", bench.one_fold_per_seed, "Validate on a single fold per seed");
  c_bench->add_option("--runs", bench.runs_out, "Write per-run results as CSV");
  c_bench->add_option("--deltas", bench.deltas_out, "Write weighted-minus-uniform deltas as CSV");
  add_train_flags(c_bench, bench.flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_train->parsed()) return erfcli::cmd_train(global, train);
    if (c_predict->parsed()) return erfcli::cmd_predict(global, predict);
    if (c_explain->parsed()) return erfcli::cmd_explain(global, explain);
    if (c_clean->parsed()) return erfcli::cmd_clean(global, clean);
    if (c_bench->parsed()) return erfcli::cmd_benchmark(global, bench);
  } catch (const erforest::TrainingError& e) {
    std::cerr << "erf: training failed: " << e.what() << '\n';
    return 4;
  } catch (const erforest::Error& e) {
    std::cerr << "erf: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "erf: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "erf: unexpected error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
