#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace erforest {

// Dense row-major matrix of feature values.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// How the binary label was read from the source file.
struct LabelInfo {
  std::string column;
  // classes[0] is the raw value mapped to 0, classes[1] the one mapped to 1.
  std::array<std::string, 2> classes{"0", "1"};
  // Position of the label column in the source header; used when writing back.
  std::size_t position = 0;

  friend bool operator==(const LabelInfo&, const LabelInfo&) = default;
};

struct Dataset {
  FeatureMatrix features;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> column_names;
  std::vector<std::int64_t> row_ids;
  LabelInfo label;

  std::size_t rows() const noexcept { return features.rows(); }
  std::size_t cols() const noexcept { return features.cols(); }

  // Throws DataError when a structural invariant is broken.
  void validate() const;
  // Throws DataError unless both classes are present.
  void require_both_classes(std::string_view what) const;

  std::size_t count_positive() const noexcept;

  Dataset select_rows(std::span<const std::size_t> indices) const;
  Dataset keep_columns(std::span<const std::size_t> columns) const;
  // Keeps the named columns in the given order; throws DataError if one is missing.
  Dataset keep_columns(std::span<const std::string> names) const;
  std::optional<std::size_t> column_index(std::string_view name) const;
};

// Plain CSV contents: header plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv_table(const std::filesystem::path& path);

// Numeric columns pass through; any other column is one-hot encoded into
// `name=value` columns, one per category in lexicographic order.
Dataset encode_table(const CsvTable& table, std::string_view label_column);
Dataset load_csv(const std::filesystem::path& path, std::string_view label_column);

// Encodes rows against an existing column schema, as produced by
// encode_table. The label column, if present, is ignored. Throws DataError
// listing missing and unexpected columns when the schemas disagree.
Dataset encode_with_schema(const CsvTable& table, std::span<const std::string> column_names,
                           std::string_view label_column);

// Writes features and labels back to CSV, label at its original position.
// Numbers use the shortest representation that round-trips.
void write_csv(std::ostream& out, const Dataset& d);
std::string format_number(double v);
// Raw cells, quoted only where needed.
void write_csv_table(std::ostream& out, const CsvTable& table);

struct SplitSpec {
  double train_fraction = 0.70;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t seed = 0;
  bool stratified = false;

  void validate() const;
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Largest-remainder allocation of n items to the given fractions; ties go to
// the earlier part.
std::vector<std::size_t> allocate_counts(std::size_t n, std::span<const double> fractions);

// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

DatasetSplits split_dataset(const Dataset& d, const SplitSpec& spec);

struct Holdout {
  Dataset train;
  Dataset val;
};

// Two-way version of split_dataset; stratified by default.
Holdout holdout_split(const Dataset& d, double val_fraction, std::uint64_t seed, bool stratified = true);

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
  std::vector<bool> constant;

  friend bool operator==(const FeatureStats&, const FeatureStats&) = default;
};

FeatureStats compute_stats(const Dataset& train);

}  // namespace erforest
