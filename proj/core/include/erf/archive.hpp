#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "erf/dataset.hpp"
#include "erf/enhanced.hpp"
#include "erf/forest.hpp"
#include "erf/weighting.hpp"

namespace erforest {

inline constexpr int kArchiveVersion = 1;

// Everything needed to predict, explain and audit a trained model.
struct ModelArchive {
  int format_version = kArchiveVersion;
  ForestModel forest;
  StoppingRule stopping;
  double threshold = 0.5;
  int best_iteration = 0;
  std::vector<IterationRecord> history;
  std::vector<std::string> column_names;
  LabelInfo label;
  std::uint64_t data_fingerprint = 0;  // FNV-1a of the training CSV bytes
  // Present when the model carries its training rows for neighbor lookups.
  std::optional<FeatureStats> stats;
  std::optional<Dataset> neighbor_data;
  // Rebuilt from forest and neighbor_data on load; never serialized.
  std::optional<TreeRankingIndex> rankings;

  bool has_neighbors() const noexcept { return neighbor_data.has_value() && stats.has_value(); }
  // Fills `rankings` from the stored neighbor data.
  void rebuild_rankings(unsigned threads = 1);
};

ModelArchive make_archive(const EnhancedModel& model, const Dataset& train, std::uint64_t data_fingerprint,
                          bool keep_neighbors = true);

std::uint64_t file_fingerprint(const std::filesystem::path& path);

void write_archive(std::ostream& out, const ModelArchive& archive);
// Throws ArchiveError on malformed input or an unsupported format_version.
ModelArchive read_archive(std::istream& in);

void save_model(const std::filesystem::path& path, const ModelArchive& archive);
ModelArchive load_model(const std::filesystem::path& path);

}  // namespace erforest
