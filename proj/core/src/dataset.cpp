#include "erf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "erf/error.hpp"
#include "erf/random.hpp"

namespace erforest {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw std::invalid_argument("FeatureMatrix: value count does not match shape");
  }
}

void Dataset::validate() const {
  const std::size_t n = rows();
  const std::size_t p = cols();
  if (labels.size() != n || row_ids.size() != n) {
    throw DataError("dataset: labels/row_ids length does not match the feature matrix");
  }
  if (column_names.size() != p) {
    throw DataError("dataset: column_names length does not match the feature matrix");
  }
  for (double v : features.values()) {
    if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
  }
  for (auto y : labels) {
    if (y > 1) throw DataError("dataset: labels must be 0 or 1");
  }
  std::unordered_set<std::string> names(column_names.begin(), column_names.end());
  if (names.size() != p) throw DataError("dataset: duplicate column names");
  std::unordered_set<std::int64_t> ids(row_ids.begin(), row_ids.end());
  if (ids.size() != n) throw DataError("dataset: duplicate row ids");
}

std::size_t Dataset::count_positive() const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void Dataset::require_both_classes(std::string_view what) const {
  const std::size_t pos = count_positive();
  if (pos == 0 || pos == rows()) {
    throw DataError(std::string(what) + ": both classes must be present");
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  Dataset out;
  out.column_names = column_names;
  out.label = label;
  const std::size_t p = cols();
  std::vector<double> values;
  values.reserve(indices.size() * p);
  out.labels.reserve(indices.size());
  out.row_ids.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows()) throw std::out_of_range("select_rows: index out of range");
    auto r = features.row(i);
    values.insert(values.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
    out.row_ids.push_back(row_ids[i]);
  }
  out.features = FeatureMatrix(indices.size(), p, std::move(values));
  return out;
}

Dataset Dataset::keep_columns(std::span<const std::size_t> columns) const {
  Dataset out;
  out.labels = labels;
  out.row_ids = row_ids;
  out.label = label;
  for (std::size_t c : columns) {
    if (c >= cols()) throw std::out_of_range("keep_columns: column out of range");
    out.column_names.push_back(column_names[c]);
  }
  FeatureMatrix m(rows(), columns.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) m(r, j) = features(r, columns[j]);
  }
  out.features = std::move(m);
  return out;
}

Dataset Dataset::keep_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& name : names) {
    auto c = column_index(name);
    if (!c) throw DataError("dataset: missing column '" + name + "'");
    idx.push_back(*c);
  }
  return keep_columns(std::span<const std::size_t>(idx));
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names.begin());
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Parses a whole cell as a double; nullopt if it is not a number.
std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Splits one logical record; quoted fields may contain commas, doubled quotes
// and newlines, so the caller passes the whole stream.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char ch = 0;
  while (in.get(ch)) {
    any = true;
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string missing_cell_message(std::size_t row, const std::string& column) {
  return "csv: missing value at data row " + std::to_string(row + 1) + " (line " +
         std::to_string(row + 2) + "), column '" + column + "'";
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> fields;
  if (!read_record(in, fields)) throw DataError("csv: empty input, header row required");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  for (auto& f : fields) table.header.emplace_back(trim(f));
  std::unordered_set<std::string> seen;
  for (const auto& h : table.header) {
    if (!seen.insert(h).second) throw DataError("csv: duplicate header column '" + h + "'");
  }
  while (read_record(in, fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != table.header.size()) {
      throw DataError("csv: data row " + std::to_string(table.rows.size() + 1) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open '" + path.string() + "'");
  return parse_csv(in);
}

namespace {

struct ColumnPlan {
  std::size_t raw_index = 0;
  bool numeric = true;
  std::vector<std::string> categories;  // sorted, categorical columns only
};

std::vector<std::uint8_t> encode_labels(const CsvTable& table, std::size_t label_idx,
                                        LabelInfo& info) {
  std::set<std::string> distinct;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto v = trim(table.rows[r][label_idx]);
    if (v.empty()) throw DataError(missing_cell_message(r, table.header[label_idx]));
    distinct.emplace(v);
  }
  if (distinct.size() != 2) {
    throw DataError("csv: label column '" + table.header[label_idx] + "' has " +
                    std::to_string(distinct.size()) + " distinct values, expected 2");
  }
  // std::set is ordered, so this is the lexicographic mapping; {"0","1"} maps to itself.
  info.classes = {*distinct.begin(), *std::next(distinct.begin())};
  std::vector<std::uint8_t> labels;
  labels.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    labels.push_back(trim(row[label_idx]) == info.classes[1] ? 1 : 0);
  }
  return labels;
}

}  // namespace

Dataset encode_table(const CsvTable& table, std::string_view label_column) {
  auto it = std::find(table.header.begin(), table.header.end(), label_column);
  if (it == table.header.end()) {
    throw DataError("csv: label column '" + std::string(label_column) + "' not found");
  }
  const std::size_t label_idx = static_cast<std::size_t>(it - table.header.begin());
  const std::size_t n = table.rows.size();

  Dataset d;
  d.label.column = std::string(label_column);
  d.label.position = label_idx;
  d.labels = encode_labels(table, label_idx, d.label);

  std::vector<ColumnPlan> plans;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == label_idx) continue;
    ColumnPlan plan;
    plan.raw_index = c;
    for (std::size_t r = 0; r < n; ++r) {
      auto cell = trim(table.rows[r][c]);
      if (cell.empty()) throw DataError(missing_cell_message(r, table.header[c]));
      if (plan.numeric && !parse_number(cell)) plan.numeric = false;
    }
    if (!plan.numeric) {
      std::set<std::string> cats;
      for (const auto& row : table.rows) cats.emplace(trim(row[c]));
      plan.categories.assign(cats.begin(), cats.end());
    }
    plans.push_back(std::move(plan));
  }

  for (const auto& plan : plans) {
    const auto& name = table.header[plan.raw_index];
    if (plan.numeric) {
      d.column_names.push_back(name);
    } else {
      for (const auto& cat : plan.categories) d.column_names.push_back(name + "=" + cat);
    }
  }

  const std::size_t p = d.column_names.size();
  FeatureMatrix m(n, p);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t j = 0;
    for (const auto& plan : plans) {
      auto cell = trim(table.rows[r][plan.raw_index]);
      if (plan.numeric) {
        const double v = *parse_number(cell);
        if (!std::isfinite(v)) throw DataError(missing_cell_message(r, table.header[plan.raw_index]));
        m(r, j++) = v;
      } else {
        for (const auto& cat : plan.categories) m(r, j++) = (cell == cat) ? 1.0 : 0.0;
      }
    }
  }
  d.features = std::move(m);
  d.row_ids.resize(n);
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::int64_t{0});
  d.validate();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view label_column) {
  return encode_table(read_csv_table(path), label_column);
}

Dataset encode_with_schema(const CsvTable& table, std::span<const std::string> column_names,
                           std::string_view label_column) {
  std::unordered_map<std::string, std::size_t> raw;
  for (std::size_t c = 0; c < table.header.size(); ++c) raw.emplace(table.header[c], c);

  struct Source {
    std::size_t raw_index;
    std::optional<std::string> category;
  };
  std::vector<Source> sources;
  std::vector<std::string> missing;
  std::unordered_set<std::size_t> used;
  for (const auto& name : column_names) {
    if (auto f = raw.find(name); f != raw.end() && name != label_column) {
      sources.push_back({f->second, std::nullopt});
      used.insert(f->second);
      continue;
    }
    const auto eq = name.find('=');
    if (eq != std::string::npos) {
      if (auto f = raw.find(name.substr(0, eq)); f != raw.end()) {
        sources.push_back({f->second, name.substr(eq + 1)});
        used.insert(f->second);
        continue;
      }
    }
    missing.push_back(name);
  }
  std::vector<std::string> extra;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] != label_column && !used.count(c)) extra.push_back(table.header[c]);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "schema mismatch:";
    if (!missing.empty()) {
      msg += " missing columns [";
      for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
      msg += "]";
    }
    if (!extra.empty()) {
      msg += " unexpected columns [";
      for (std::size_t i = 0; i < extra.size(); ++i) msg += (i ? ", " : "") + extra[i];
      msg += "]";
    }
    throw DataError(msg);
  }

  const std::size_t n = table.rows.size();
  Dataset d;
  d.column_names.assign(column_names.begin(), column_names.end());
  d.label.column = std::string(label_column);
  FeatureMatrix m(n, column_names.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const auto& src = sources[j];
      auto cell = trim(table.rows[r][src.raw_index]);
      if (cell.empty()) throw DataError(missing_cell_message(r, table.header[src.raw_index]));
      if (src.category) {
        m(r, j) = (cell == *src.category) ? 1.0 : 0.0;
      } else {
        auto v = parse_number(cell);
        if (!v || !std::isfinite(*v)) {
          throw DataError("csv: non-numeric value '" + std::string(cell) + "' at data row " +
                          std::to_string(r + 1) + ", column '" + table.header[src.raw_index] + "'");
        }
        m(r, j) = *v;
      }
    }
  }
  d.features = std::move(m);
  d.labels.assign(n, 0);
  d.row_ids.resize(n);
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::int64_t{0});
  return d;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, ptr);
}

namespace {

void write_field(std::ostream& out, std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

void write_csv(std::ostream& out, const Dataset& d) {
  const std::size_t p = d.cols();
  const std::size_t label_at = std::min(d.label.position, p);
  const std::string label_name = d.label.column.empty() ? "label" : d.label.column;
  auto emit = [&](std::size_t j, bool& first, auto&& field) {
    if (!first) out << ',';
    first = false;
    field(j);
  };
  bool first = true;
  for (std::size_t j = 0; j <= p; ++j) {
    if (j == label_at) emit(j, first, [&](std::size_t) { write_field(out, label_name); });
    if (j < p) emit(j, first, [&](std::size_t c) { write_field(out, d.column_names[c]); });
  }
  out << '\n';
  for (std::size_t r = 0; r < d.rows(); ++r) {
    first = true;
    for (std::size_t j = 0; j <= p; ++j) {
      if (j == label_at) emit(j, first, [&](std::size_t) { write_field(out, d.label.classes[d.labels[r]]); });
      if (j < p) emit(j, first, [&](std::size_t c) { out << format_number(d.features(r, c)); });
    }
    out << '\n';
  }
}

void write_csv_table(std::ostream& out, const CsvTable& table) {
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j) out << ',';
      write_field(out, fields[j]);
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
}

// ---------------------------------------------------------------------------
// Splits and statistics

void SplitSpec::validate() const {
  for (double f : {train_fraction, val_fraction, test_fraction}) {
    if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("SplitSpec: fractions must lie in (0,1)");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw std::invalid_argument("SplitSpec: fractions must sum to 1");
  }
}

std::vector<std::size_t> allocate_counts(std::size_t n, std::span<const double> fractions) {
  std::vector<std::size_t> counts(fractions.size());
  std::vector<double> remainders(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = static_cast<double>(n) * fractions[i];
    // Guard against 0.7*10 = 6.9999999 style rounding.
    double whole = std::floor(exact + 1e-9);
    counts[i] = static_cast<std::size_t>(whole);
    remainders[i] = std::max(0.0, exact - whole);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(fractions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b] + 1e-12;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) counts[order[k % order.size()]] += 1;
  return counts;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

DatasetSplits split_dataset(const Dataset& d, const SplitSpec& spec) {
  spec.validate();
  if (d.rows() == 0) throw DataError("split_dataset: empty dataset");
  const std::array<double, 3> fractions{spec.train_fraction, spec.val_fraction, spec.test_fraction};
  std::array<std::vector<std::size_t>, 3> parts;

  auto distribute = [&](const std::vector<std::size_t>& pool) {
    auto counts = allocate_counts(pool.size(), fractions);
    std::size_t at = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      parts[k].insert(parts[k].end(), pool.begin() + static_cast<std::ptrdiff_t>(at),
                      pool.begin() + static_cast<std::ptrdiff_t>(at + counts[k]));
      at += counts[k];
    }
  };

  auto perm = shuffled_indices(d.rows(), spec.seed);
  if (spec.stratified) {
    std::vector<std::size_t> neg, pos;
    for (std::size_t i : perm) (d.labels[i] ? pos : neg).push_back(i);
    distribute(neg);
    distribute(pos);
  } else {
    distribute(perm);
  }
  for (auto& part : parts) {
    if (part.empty()) throw DataError("split_dataset: a split would be empty");
    std::sort(part.begin(), part.end());
  }
  return {d.select_rows(parts[0]), d.select_rows(parts[1]), d.select_rows(parts[2])};
}

Holdout holdout_split(const Dataset& d, double val_fraction, std::uint64_t seed, bool stratified) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw std::invalid_argument("holdout_split: fraction in (0, 1)");
  const std::array<double, 2> fractions{1.0 - val_fraction, val_fraction};
  std::array<std::vector<std::size_t>, 2> parts;
  auto distribute = [&](const std::vector<std::size_t>& pool) {
    const auto counts = allocate_counts(pool.size(), fractions);
    parts[0].insert(parts[0].end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(counts[0]));
    parts[1].insert(parts[1].end(), pool.begin() + static_cast<std::ptrdiff_t>(counts[0]), pool.end());
  };
  auto perm = shuffled_indices(d.rows(), seed);
  if (stratified) {
    std::vector<std::size_t> neg, pos;
    for (std::size_t i : perm) (d.labels[i] ? pos : neg).push_back(i);
    distribute(neg);
    distribute(pos);
  } else {
    distribute(perm);
  }
  for (auto& part : parts) {
    if (part.empty()) throw DataError("holdout_split: a split would be empty");
    std::sort(part.begin(), part.end());
  }
  return {d.select_rows(parts[0]), d.select_rows(parts[1])};
}

FeatureStats compute_stats(const Dataset& train) {
  const std::size_t n = train.rows();
  const std::size_t p = train.cols();
  if (n == 0) throw DataError("compute_stats: empty dataset");
  FeatureStats s;
  s.mean.assign(p, 0.0);
  s.stddev.assign(p, 0.0);
  s.constant.assign(p, false);
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += train.features(r, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    bool constant = true;
    for (std::size_t r = 0; r < n; ++r) {
      const double dlt = train.features(r, j) - mean;
      ss += dlt * dlt;
      constant = constant && train.features(r, j) == train.features(0, j);
    }
    s.mean[j] = constant ? train.features(0, j) : mean;
    s.stddev[j] = constant ? 0.0 : std::sqrt(ss / static_cast<double>(n));
    s.constant[j] = constant;
  }
  return s;
}

}  // namespace erforest
