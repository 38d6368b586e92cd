#include "erf/archive.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "erf/error.hpp"
#include "erf/hash.hpp"

namespace erforest {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != s.size()) throw ArchiveError("archive: bad hex value '" + s + "'");
  return v;
}

json config_to_json(const TrainConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"feature_mode", c.feature_mode == FeatureMode::per_tree ? "per_tree" : "per_split"},
          {"mtry", c.mtry},
          {"min_leaf_fraction", c.min_leaf_fraction},
          {"lambda", c.lambda},
          {"use_sample_weights", c.use_sample_weights},
          {"use_sample_probs", c.use_sample_probs},
          {"seed", hex64(c.seed)}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.n_trees = j.at("n_trees").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  const auto mode = j.at("feature_mode").get<std::string>();
  if (mode != "per_tree" && mode != "per_split") throw ArchiveError("archive: unknown feature_mode '" + mode + "'");
  c.feature_mode = mode == "per_tree" ? FeatureMode::per_tree : FeatureMode::per_split;
  c.mtry = j.at("mtry").get<int>();
  c.min_leaf_fraction = j.at("min_leaf_fraction").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.use_sample_weights = j.at("use_sample_weights").get<bool>();
  c.use_sample_probs = j.at("use_sample_probs").get<bool>();
  c.seed = parse_hex64(j.at("seed").get<std::string>());
  return c;
}

json node_to_json(const TreeModel& t, int idx) {
  const auto& n = t.nodes.at(static_cast<std::size_t>(idx));
  json j = {{"p1", n.p1}, {"weight", n.weight}, {"impurity", n.impurity}};
  if (!n.is_leaf()) {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["gain"] = n.gain;
    j["left"] = node_to_json(t, n.left);
    j["right"] = node_to_json(t, n.right);
  }
  return j;
}

// Appends in pre-order, left first, which is the order fit_tree produces.
int node_from_json(const json& j, TreeModel& t, int depth) {
  if (depth > t.depth_limit) throw ArchiveError("archive: tree deeper than its depth limit");
  const int idx = static_cast<int>(t.nodes.size());
  TreeNode n;
  n.p1 = j.at("p1").get<double>();
  n.weight = j.at("weight").get<double>();
  n.impurity = j.at("impurity").get<double>();
  t.nodes.push_back(n);
  if (j.contains("feature")) {
    const int f = j.at("feature").get<int>();
    if (f < 0 || static_cast<std::size_t>(f) >= t.n_features) throw ArchiveError("archive: split feature out of range");
    const double threshold = j.at("threshold").get<double>();
    const double gain = j.at("gain").get<double>();
    const int left = node_from_json(j.at("left"), t, depth + 1);
    const int right = node_from_json(j.at("right"), t, depth + 1);
    auto& self = t.nodes[static_cast<std::size_t>(idx)];
    self.feature = f;
    self.threshold = threshold;
    self.gain = gain;
    self.left = left;
    self.right = right;
  }
  return idx;
}

json tree_to_json(const TreeModel& t) {
  return {{"depth_limit", t.depth_limit}, {"feature_subset", t.feature_subset}, {"root", node_to_json(t, 0)}};
}

TreeModel tree_from_json(const json& j, std::size_t n_features) {
  TreeModel t;
  t.n_features = n_features;
  t.depth_limit = j.at("depth_limit").get<int>();
  t.feature_subset = j.at("feature_subset").get<std::vector<int>>();
  node_from_json(j.at("root"), t, 0);
  return t;
}

json record_to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration},
          {"threshold", r.threshold},
          {"train_auc", r.train_auc},
          {"val_auc", r.val_auc},
          {"weight_digest", hex64(r.weight_digest)},
          {"train_prediction_digest", hex64(r.train_prediction_digest)}};
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.threshold = j.at("threshold").get<double>();
  r.train_auc = j.at("train_auc").get<double>();
  r.val_auc = j.at("val_auc").get<double>();
  r.weight_digest = parse_hex64(j.at("weight_digest").get<std::string>());
  r.train_prediction_digest = parse_hex64(j.at("train_prediction_digest").get<std::string>());
  return r;
}

json dataset_to_json(const Dataset& d) {
  return {{"rows", d.rows()},
          {"cols", d.cols()},
          {"values", d.features.values()},
          {"labels", d.labels},
          {"row_ids", d.row_ids}};
}

Dataset dataset_from_json(const json& j, const ModelArchive& a) {
  Dataset d;
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto values = j.at("values").get<std::vector<double>>();
  if (cols != a.column_names.size() || values.size() != rows * cols) {
    throw ArchiveError("archive: neighbor data has the wrong shape");
  }
  d.features = FeatureMatrix(rows, cols, std::move(values));
  d.labels = j.at("labels").get<std::vector<std::uint8_t>>();
  d.row_ids = j.at("row_ids").get<std::vector<std::int64_t>>();
  d.column_names = a.column_names;
  d.label = a.label;
  try {
    d.validate();
  } catch (const DataError& e) {
    throw ArchiveError(std::string("archive: neighbor data invalid: ") + e.what());
  }
  return d;
}

}  // namespace

void ModelArchive::rebuild_rankings(unsigned threads) {
  if (!neighbor_data) {
    rankings.reset();
    return;
  }
  rankings = build_rankings(forest, *neighbor_data, threads);
}

ModelArchive make_archive(const EnhancedModel& model, const Dataset& train, std::uint64_t data_fingerprint,
                          bool keep_neighbors) {
  ModelArchive a;
  a.forest = model.forest;
  a.forest.bootstrap_log.clear();
  a.stopping = model.stopping;
  a.threshold = model.threshold;
  a.best_iteration = model.best_iteration;
  a.history = model.history;
  a.column_names = train.column_names;
  a.label = train.label;
  a.data_fingerprint = data_fingerprint;
  if (keep_neighbors) {
    a.stats = compute_stats(train);
    a.neighbor_data = train;
  }
  return a;
}

std::uint64_t file_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a(bytes);
}

void write_archive(std::ostream& out, const ModelArchive& a) {
  json trees = json::array();
  for (const auto& t : a.forest.trees) trees.push_back(tree_to_json(t));
  json history = json::array();
  for (const auto& r : a.history) history.push_back(record_to_json(r));

  json j;
  j["format_version"] = a.format_version;
  j["config"] = config_to_json(a.forest.config);
  j["stopping"] = {{"max_iterations", a.stopping.max_iterations}, {"patience", a.stopping.patience}};
  j["threshold"] = a.threshold;
  j["best_iteration"] = a.best_iteration;
  j["column_names"] = a.column_names;
  j["label"] = {{"column", a.label.column}, {"classes", a.label.classes}, {"position", a.label.position}};
  j["data_fingerprint"] = hex64(a.data_fingerprint);
  j["training_row_ids"] = a.forest.training_row_ids;
  j["history"] = std::move(history);
  if (a.stats) {
    std::vector<int> constant(a.stats->constant.begin(), a.stats->constant.end());
    j["stats"] = {{"mean", a.stats->mean}, {"stddev", a.stats->stddev}, {"constant", constant}};
  }
  if (a.neighbor_data) j["neighbor_data"] = dataset_to_json(*a.neighbor_data);
  j["trees"] = std::move(trees);
  out << j.dump() << '\n';
}

ModelArchive read_archive(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ArchiveError(std::string("corrupt model archive: ") + e.what());
  }
  try {
    ModelArchive a;
    if (!j.is_object() || !j.contains("format_version")) throw ArchiveError("corrupt model archive: no format_version");
    a.format_version = j.at("format_version").get<int>();
    if (a.format_version != kArchiveVersion) {
      throw ArchiveError("unsupported model archive version " + std::to_string(a.format_version) + " (expected " +
                         std::to_string(kArchiveVersion) + ")");
    }
    a.column_names = j.at("column_names").get<std::vector<std::string>>();
    a.forest.config = config_from_json(j.at("config"));
    a.forest.n_features = a.column_names.size();
    a.forest.training_row_ids = j.at("training_row_ids").get<std::vector<std::int64_t>>();
    a.stopping.max_iterations = j.at("stopping").at("max_iterations").get<int>();
    a.stopping.patience = j.at("stopping").at("patience").get<int>();
    a.threshold = j.at("threshold").get<double>();
    a.best_iteration = j.at("best_iteration").get<int>();
    const auto& lab = j.at("label");
    a.label.column = lab.at("column").get<std::string>();
    a.label.classes = lab.at("classes").get<std::array<std::string, 2>>();
    a.label.position = lab.at("position").get<std::size_t>();
    a.data_fingerprint = parse_hex64(j.at("data_fingerprint").get<std::string>());
    for (const auto& r : j.at("history")) a.history.push_back(record_from_json(r));
    for (const auto& t : j.at("trees")) a.forest.trees.push_back(tree_from_json(t, a.forest.n_features));
    if (a.forest.trees.size() != static_cast<std::size_t>(a.forest.config.n_trees)) {
      throw ArchiveError("corrupt model archive: tree count does not match config");
    }
    if (j.contains("stats")) {
      FeatureStats s;
      s.mean = j["stats"].at("mean").get<std::vector<double>>();
      s.stddev = j["stats"].at("stddev").get<std::vector<double>>();
      for (int c : j["stats"].at("constant").get<std::vector<int>>()) s.constant.push_back(c != 0);
      if (s.mean.size() != a.column_names.size() || s.stddev.size() != s.mean.size() ||
          s.constant.size() != s.mean.size()) {
        throw ArchiveError("corrupt model archive: stats have the wrong length");
      }
      a.stats = std::move(s);
    }
    if (j.contains("neighbor_data")) a.neighbor_data = dataset_from_json(j["neighbor_data"], a);
    return a;
  } catch (const json::exception& e) {
    throw ArchiveError(std::string("corrupt model archive: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ArchiveError(std::string("corrupt model archive: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ArchiveError(std::string("corrupt model archive: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelArchive& archive) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArchiveError("cannot write " + path.string());
  write_archive(out, archive);
  if (!out) throw ArchiveError("failed writing " + path.string());
}

ModelArchive load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("cannot open " + path.string());
  auto a = read_archive(in);
  a.rebuild_rankings();
  return a;
}

}  // namespace erforest
