#include "erf/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "erf/error.hpp"
#include "erf/metrics.hpp"
#include "erf/parallel.hpp"

namespace erforest {

std::string Mode::name() const {
  std::string out;
  auto add = [&](bool on, const char* tag) {
    if (!on) return;
    if (!out.empty()) out += '-';
    out += tag;
  };
  add(ft, "FT");
  add(sw, "SW");
  add(sp, "SP");
  if (out.empty()) out = "Initial";
  if (model_weights) out += "+MW";
  return out;
}

TrainConfig Mode::apply(TrainConfig base) const {
  base.feature_mode = ft ? FeatureMode::per_tree : FeatureMode::per_split;
  base.use_sample_weights = sw;
  base.use_sample_probs = sp;
  return base;
}

StoppingRule Mode::stopping(StoppingRule base) const {
  if (!sw && !sp) base.max_iterations = 1;
  return base;
}

std::optional<Mode> parse_mode(std::string_view text) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  Mode m;
  if (s.size() >= 3 && s.ends_with("+MW")) {
    m.model_weights = true;
    s.resize(s.size() - 3);
  }
  if (s == "INITIAL" || s == "VANILLA" || s.empty()) return m;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t dash = std::min(s.find('-', pos), s.size());
    const std::string tok = s.substr(pos, dash - pos);
    bool* flag = tok == "FT" ? &m.ft : tok == "SW" ? &m.sw : tok == "SP" ? &m.sp : nullptr;
    if (!flag || *flag) return std::nullopt;
    *flag = true;
    pos = dash + 1;
  }
  return m;
}

std::vector<Mode> ablation_modes() {
  return {{false, false, false}, {true, false, false}, {false, true, false}, {false, false, true},
          {true, true, false},   {true, false, true},  {false, true, true},  {true, true, true}};
}

void BenchmarkSpec::validate() const {
  if (modes.empty()) throw std::invalid_argument("benchmark: no modes");
  if (n_seeds < 1) throw std::invalid_argument("benchmark: n_seeds must be >= 1");
  if (folds < 2) throw std::invalid_argument("benchmark: folds must be >= 2");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("benchmark: test_fraction in (0, 1)");
  stopping.validate();
}

RunSplit benchmark_split(const Dataset& data, double test_fraction, int folds, int fold, std::uint64_t seed) {
  if (folds < 2 || fold < 0 || fold >= folds) throw std::invalid_argument("benchmark_split: bad fold");
  const auto order = shuffled_indices(data.rows(), seed);
  std::vector<std::size_t> test, val, train;
  const std::vector<double> holdout{test_fraction, 1.0 - test_fraction};
  const std::vector<double> equal(static_cast<std::size_t>(folds), 1.0 / folds);
  for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> members;
    for (std::size_t i : order) {
      if (data.labels[i] == cls) members.push_back(i);
    }
    const auto parts = allocate_counts(members.size(), holdout);
    test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(parts[0]));
    const auto sizes = allocate_counts(parts[1], equal);
    std::size_t at = parts[0];
    for (int f = 0; f < folds; ++f) {
      auto first = members.begin() + static_cast<std::ptrdiff_t>(at);
      auto last = first + static_cast<std::ptrdiff_t>(sizes[static_cast<std::size_t>(f)]);
      (f == fold ? val : train).insert(f == fold ? val.end() : train.end(), first, last);
      at += sizes[static_cast<std::size_t>(f)];
    }
  }
  for (auto* v : {&test, &val, &train}) std::sort(v->begin(), v->end());
  if (test.empty() || val.empty() || train.empty()) throw DataError("benchmark_split: dataset too small to split");
  return {data.select_rows(train), data.select_rows(val), data.select_rows(test)};
}

namespace {

struct Task {
  int seed_index;
  int fold;
  std::size_t base_mode;  // index into the list of distinct non-MW modes
};

}  // namespace

BenchmarkResult run_benchmark(const Dataset& data, const BenchmarkSpec& spec,
                              const std::function<void(const RunResult&)>& on_run) {
  spec.validate();
  data.require_both_classes("benchmark data");

  // Modes that differ only by +MW share one trained forest per run.
  std::vector<Mode> bases;
  for (const auto& m : spec.modes) {
    if (std::find(bases.begin(), bases.end(), m.without_weights()) == bases.end()) bases.push_back(m.without_weights());
  }
  std::vector<std::pair<int, int>> runs;
  for (int s = 0; s < spec.n_seeds; ++s) {
    if (spec.one_fold_per_seed) {
      runs.emplace_back(s, s % spec.folds);
    } else {
      for (int f = 0; f < spec.folds; ++f) runs.emplace_back(s, f);
    }
  }
  std::vector<Task> tasks;
  for (const auto& [s, f] : runs) {
    for (std::size_t b = 0; b < bases.size(); ++b) tasks.push_back({s, f, b});
  }

  // results[task][k]: one RunResult per spec mode sharing the task's base.
  std::vector<std::vector<RunResult>> results(tasks.size());
  parallel_for(tasks.size(), spec.threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    const std::uint64_t split_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(task.seed_index));
    const RunSplit split = benchmark_split(data, spec.test_fraction, spec.folds, task.fold, split_seed);
    const Mode base = bases[task.base_mode];
    TrainConfig config = base.apply(spec.base);
    config.seed = derive_seed(split_seed, static_cast<std::uint64_t>(task.fold) + 1);
    const EnhancedModel model = train_enhanced(split.train, split.val, config, base.stopping(spec.stopping), 1);
    const double uniform_test = auc(model.forest.predict(split.test.features), split.test.labels);

    std::optional<TreeRankingIndex> rankings;
    std::optional<NeighborIndex> neighbors;
    for (const auto& m : spec.modes) {
      if (m.without_weights() != base) continue;
      RunResult r;
      r.mode = m;
      r.seed_index = task.seed_index;
      r.fold = task.fold;
      r.iterations = static_cast<int>(model.history.size());
      r.uniform_test_auc = uniform_test;
      if (!m.model_weights) {
        r.val_auc = model.best_record().val_auc;
        r.test_auc = uniform_test;
      } else {
        if (!rankings) {
          rankings = build_rankings(model.forest, split.train);
          neighbors = NeighborIndex(split.train, compute_stats(split.train));
        }
        const auto grid = spec.grid.empty() ? default_weighting_grid(split.train.rows(), model.forest.trees.size())
                                            : spec.grid;
        const auto sel = select_weighting_params(model.forest, *rankings, *neighbors, split.val, grid);
        r.weighting = sel.best;
        r.val_auc = sel.val_auc;
        r.test_auc = auc(weighted_predictions(model.forest, *rankings, *neighbors, split.test.features, sel.best),
                         split.test.labels);
      }
      results[t].push_back(r);
    }
  });

  BenchmarkResult out;
  for (const auto& [s, f] : runs) {
    for (const auto& m : spec.modes) {
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (tasks[t].seed_index != s || tasks[t].fold != f) continue;
        for (const auto& r : results[t]) {
          if (r.mode == m) {
            out.runs.push_back(r);
            if (on_run) on_run(r);
          }
        }
      }
    }
  }
  for (const auto& m : spec.modes) {
    ModeSummary sum;
    sum.mode = m;
    std::vector<double> v;
    for (const auto& r : out.runs) {
      if (r.mode == m) v.push_back(r.test_auc);
    }
    sum.runs = v.size();
    for (double x : v) sum.mean += x;
    sum.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - sum.mean) * (x - sum.mean);
      sum.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    out.summary.push_back(sum);
  }
  return out;
}

void write_benchmark_table(std::ostream& out, std::string_view dataset, const BenchmarkResult& result) {
  out << "dataset";
  for (const auto& s : result.summary) out << " & " << s.mode.name();
  out << " \\\\\n" << dataset;
  char buf[64];
  for (const auto& s : result.summary) {
    std::snprintf(buf, sizeof buf, " & %.4f", s.mean);
    out << buf;
  }
  out << " \\\\\n";
  out << "std";
  for (const auto& s : result.summary) {
    std::snprintf(buf, sizeof buf, " & %.4f", s.stddev);
    out << buf;
  }
  out << " \\\\\n";
}

void write_weighting_deltas(std::ostream& out, const BenchmarkResult& result) {
  char buf[160];
  out << "mode,seed,fold,M,L,uniform_test_auc,weighted_test_auc,delta\n";
  for (const auto& r : result.runs) {
    if (!r.weighting) continue;
    std::snprintf(buf, sizeof buf, ",%d,%d,%zu,%zu,%.4f,%.4f,%+.4f\n", r.seed_index, r.fold, r.weighting->m,
                  r.weighting->l, r.uniform_test_auc, r.test_auc, r.test_auc - r.uniform_test_auc);
    out << r.mode.name() << buf;
  }
}

}  // namespace erforest
