#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "erf/archive.hpp"
#include "erf/cleaning.hpp"
#include "erf/dataset.hpp"
#include "erf/dot.hpp"
#include "erf/error.hpp"
#include "erf/experiment.hpp"
#include "erf/metrics.hpp"
#include "erf/weighting.hpp"

namespace erfcli {

using namespace erforest;

TrainConfig TrainFlags::config(std::uint64_t seed) const {
  TrainConfig c;
  if (!preset.empty()) {
    auto p = find_preset(preset);
    if (!p) throw std::invalid_argument("unknown preset '" + preset + "'");
    c = p->apply(c);
  }
  if (trees) c.n_trees = *trees;
  if (max_depth) c.max_depth = *max_depth;
  if (lambda) c.lambda = *lambda;
  if (mtry) c.mtry = *mtry;
  if (feature_mode) {
    if (*feature_mode == "per_tree") {
      c.feature_mode = FeatureMode::per_tree;
    } else if (*feature_mode == "per_split") {
      c.feature_mode = FeatureMode::per_split;
    } else {
      throw std::invalid_argument("--feature-mode must be per_split or per_tree");
    }
  }
  if (sample_weights) c.use_sample_weights = *sample_weights;
  if (sample_probs) c.use_sample_probs = *sample_probs;
  c.seed = seed;
  return c;
}

StoppingRule TrainFlags::stopping() const {
  StoppingRule s;
  if (max_iters) s.max_iterations = *max_iters;
  if (patience) s.patience = *patience;
  return s;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

// Writes to `path`, or to stdout when it is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  auto out = open_out(path);
  fn(out);
}

bool blank_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  char c;
  while (in.get(c)) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Rows encoded against a model's schema, labels read through its class names.
Dataset encode_labeled(const CsvTable& table, std::span<const std::string> columns, const LabelInfo& label) {
  Dataset d = encode_with_schema(table, columns, label.column);
  auto it = std::find(table.header.begin(), table.header.end(), label.column);
  if (it == table.header.end()) throw DataError("csv: label column '" + label.column + "' not found");
  const auto idx = static_cast<std::size_t>(it - table.header.begin());
  d.label = label;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& v = table.rows[r][idx];
    if (v == label.classes[1]) {
      d.labels[r] = 1;
    } else if (v == label.classes[0]) {
      d.labels[r] = 0;
    } else {
      throw DataError("csv: unknown label '" + v + "' at data row " + std::to_string(r + 1));
    }
  }
  return d;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

int cmd_train(const GlobalOptions& g, const TrainArgs& a) {
  const CsvTable table = read_csv_table(a.data);
  const Dataset d = encode_table(table, a.label);
  Dataset train, val;
  if (!a.val_data.empty()) {
    train = d;
    val = encode_labeled(read_csv_table(a.val_data), d.column_names, d.label);
  } else {
    auto h = holdout_split(d, a.val_fraction, g.seed);
    train = std::move(h.train);
    val = std::move(h.val);
  }
  const TrainConfig config = a.flags.config(g.seed);
  const StoppingRule stopping = a.flags.stopping();
  const EnhancedModel model = train_enhanced(train, val, config, stopping, g.threads);

  save_model(a.out, make_archive(model, train, file_fingerprint(a.data), !a.no_neighbors));
  if (!a.history.empty()) {
    auto out = open_out(a.history);
    write_history_jsonl(out, model.history);
  }
  if (!g.quiet) {
    std::cout << "val_auc " << fixed4(model.best_record().val_auc) << "\nthreshold " << format_number(model.threshold)
              << "\niterations " << model.history.size() << "\nbest_iteration " << model.best_iteration << '\n';
    if (model.weight_collapse) std::cout << "note: sample weights collapsed to zero; kept the best model so far\n";
  }
  return 0;
}

int cmd_predict(const GlobalOptions& g, const PredictArgs& a) {
  const ModelArchive archive = load_model(a.model);
  if (!a.weighted.empty() && a.weighted.size() != 2) throw std::invalid_argument("--weighted takes M and L");

  Dataset d;
  if (!blank_file(a.data)) d = encode_with_schema(read_csv_table(a.data), archive.column_names, archive.label.column);
  std::vector<double> p;
  if (d.rows() > 0) {
    if (a.weighted.empty()) {
      p = archive.forest.predict(d.features);
    } else {
      if (!archive.has_neighbors()) throw DataError("model was saved without neighbor data; --weighted unavailable");
      const NeighborIndex index(*archive.neighbor_data, *archive.stats);
      p = weighted_predictions(archive.forest, *archive.rankings, index, d.features, {a.weighted[0], a.weighted[1]},
                               g.threads);
    }
  }
  with_output(a.out, [&](std::ostream& out) {
    out << "row_id,p,class\n";
    for (std::size_t r = 0; r < p.size(); ++r) {
      out << d.row_ids[r] << ',' << format_number(p[r]) << ',' << (p[r] >= archive.threshold ? 1 : 0) << '\n';
    }
  });
  return 0;
}

int cmd_explain(const GlobalOptions& g, const ExplainArgs& a) {
  ModelArchive archive = load_model(a.model);
  if (!archive.has_neighbors()) {
    if (a.train.empty()) throw DataError("model has no stored training rows; pass --train");
    archive.neighbor_data = encode_labeled(read_csv_table(a.train), archive.column_names, archive.label);
    archive.stats = compute_stats(*archive.neighbor_data);
    archive.rebuild_rankings(g.threads);
  }
  const Dataset& neighbors = *archive.neighbor_data;
  const std::size_t m = std::min(a.m, neighbors.rows());
  const std::size_t l = std::min(a.l, archive.forest.trees.size());
  if (!g.quiet && (m != a.m || l != a.l)) {
    std::cerr << "note: using M=" << m << " L=" << l << " (limited by the model)\n";
  }
  const NeighborIndex index(neighbors, *archive.stats);
  Dataset d;
  if (!blank_file(a.data)) d = encode_with_schema(read_csv_table(a.data), archive.column_names, archive.label.column);
  if (d.rows() > 0) std::filesystem::create_directories(a.dot_dir);

  with_output(a.out, [&](std::ostream& out) {
    for (std::size_t r = 0; r < d.rows(); ++r) {
      const auto report = explain(archive.forest, *archive.rankings, index, d.features.row(r), m, l, a.top_k,
                                  archive.threshold);
      out << "row " << d.row_ids[r] << " p " << fixed4(report.probability) << " class " << report.predicted_class
          << " threshold " << fixed4(archive.threshold) << " M " << m << " L " << l << '\n';
      for (std::size_t k = 0; k < report.top.size(); ++k) {
        const auto& t = report.top[k];
        const std::string file = "row" + std::to_string(d.row_ids[r]) + "_tree" + std::to_string(t.tree) + ".dot";
        out << "  " << k + 1 << " tree " << t.tree << " score " << fixed4(t.score) << " weight " << fixed4(t.weight)
            << " s1 " << fixed4(t.s1_norm) << " s2 " << fixed4(t.s2_norm) << " dot " << file << '\n';
        auto dot = open_out((std::filesystem::path(a.dot_dir) / file).string());
        dot << to_dot(archive.forest.trees[t.tree], archive.column_names,
                      "row " + std::to_string(d.row_ids[r]) + " tree " + std::to_string(t.tree));
      }
    }
  });
  return 0;
}

int cmd_clean(const GlobalOptions& g, const CleanArgs& a) {
  const CsvTable table = read_csv_table(a.data);
  const Dataset d = encode_table(table, a.label);
  SplitSpec split;
  split.seed = g.seed;
  split.stratified = true;
  const auto parts = split_dataset(d, split);

  CleaningConfig cleaning;
  cleaning.sample_cleaning = !a.no_sample;
  cleaning.feature_cleaning = !a.no_feature;
  cleaning.n_buckets = a.buckets;
  cleaning.l = a.l;
  cleaning.max_iterations = a.max_iters;
  cleaning.early_stop_drop = a.early_stop;
  const auto result = clean_loop(parts.train, parts.val, a.flags.config(g.seed), a.flags.stopping(), cleaning,
                                 &parts.test, g.threads);
  const auto& report = result.report;

  // Raw rows keep their original text. A raw column goes away only when every
  // encoded column derived from it was removed.
  const auto removed_ids = report.removed_row_ids();
  const std::set<std::int64_t> removed_rows(removed_ids.begin(), removed_ids.end());
  const auto removed_names = report.removed_columns();
  const std::set<std::string> removed_cols(removed_names.begin(), removed_names.end());
  std::vector<std::size_t> keep_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    bool any = false;
    bool all_removed = true;
    for (const auto& name : d.column_names) {
      if (name == h || name.rfind(h + "=", 0) == 0) {
        any = true;
        all_removed = all_removed && removed_cols.count(name) > 0;
      }
    }
    if (h == a.label || !any || !all_removed) keep_cols.push_back(c);
  }
  CsvTable cleaned;
  for (std::size_t c : keep_cols) cleaned.header.push_back(table.header[c]);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (removed_rows.count(d.row_ids[r])) continue;
    std::vector<std::string> row;
    for (std::size_t c : keep_cols) row.push_back(table.rows[r][c]);
    cleaned.rows.push_back(std::move(row));
  }
  with_output(a.out, [&](std::ostream& out) { write_csv_table(out, cleaned); });
  if (!a.report.empty()) {
    auto out = open_out(a.report);
    write_cleaning_report(out, report);
  }
  if (!g.quiet) {
    std::ostream& log = a.out.empty() || a.out == "-" ? std::cerr : std::cout;
    log << "relative_auc_diff_pct " << std::to_string(report.relative_auc_diff_pct) << "\nfeature_reduction_pct "
        << std::to_string(report.feature_reduction_pct) << "\nsample_reduction_pct "
        << std::to_string(report.sample_reduction_pct) << "\nbest_iteration " << report.best_iteration << '\n';
    if (report.feature_warning) log << "warning: all feature importances were zero in some iteration\n";
  }
  return 0;
}

int cmd_benchmark(const GlobalOptions& g, const BenchmarkArgs& a) {
  const Dataset d = load_csv(a.data, a.label);
  BenchmarkSpec spec;
  spec.base = a.flags.config(g.seed);
  spec.stopping = a.flags.stopping();
  spec.n_seeds = a.seeds;
  spec.folds = a.folds;
  spec.test_fraction = a.test_fraction;
  spec.one_fold_per_seed = a.one_fold_per_seed;
  spec.seed = g.seed;
  spec.threads = g.threads;
  std::stringstream modes(a.modes);
  for (std::string tok; std::getline(modes, tok, ',');) {
    auto m = parse_mode(tok);
    if (!m) throw std::invalid_argument("unknown mode '" + tok + "'");
    spec.modes.push_back(*m);
  }
  std::stringstream grid(a.grid);
  for (std::string tok; std::getline(grid, tok, ',');) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("grid entries look like M:L");
    spec.grid.push_back({std::stoul(tok.substr(0, colon)), std::stoul(tok.substr(colon + 1))});
  }

  const auto result = run_benchmark(d, spec, [&](const RunResult& r) {
    if (g.quiet) return;
    std::cerr << "seed " << r.seed_index << " fold " << r.fold << ' ' << r.mode.name() << " test_auc "
              << fixed4(r.test_auc) << " iterations " << r.iterations << '\n';
  });
  const std::string name = a.name.empty() ? std::filesystem::path(a.data).stem().string() : a.name;
  write_benchmark_table(std::cout, name, result);
  const bool weighted = std::any_of(spec.modes.begin(), spec.modes.end(), [](const Mode& m) { return m.model_weights; });
  if (weighted) {
    if (a.deltas_out.empty()) {
      std::cout << '\n';
      write_weighting_deltas(std::cout, result);
    } else {
      auto out = open_out(a.deltas_out);
      write_weighting_deltas(out, result);
    }
  }
  if (!a.runs_out.empty()) {
    auto out = open_out(a.runs_out);
    out << "mode,seed,fold,val_auc,test_auc,iterations\n";
    for (const auto& r : result.runs) {
      out << r.mode.name() << ',' << r.seed_index << ',' << r.fold << ',' << format_number(r.val_auc) << ','
          << format_number(r.test_auc) << ',' << r.iterations << '\n';
    }
  }
  return 0;
}

}  // namespace erfcli
