#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wheelflat/features.hpp"
#include "wheelflat/flatgen.hpp"
#include "wheelflat/fnn.hpp"

namespace wheelflat {

/// Everything a pipeline run needs. Loaded from one JSON file; unknown keys
/// are rejected and every field is validated before any stage runs.
struct RunConfig {
  std::uint64_t seed = 1;
  int level = 6;                          // single-level commands
  std::vector<int> levels = {0, 1, 2, 3, 4, 5, 6};  // sweep
  std::vector<double> heights_mm = {1e-4, 1e-3, 1e-2, 1e-1, 1e-0};
  SimConfig simulation;
  SegmentationConfig segmentation;
  bool augmentation_enabled = true;
  TrainConfig training;

  struct Paths {
    std::filesystem::path signal_dir = "out";
    std::filesystem::path features;  // empty: <out>/features_L<level>.csv
    std::filesystem::path dataset;   // empty: <out>/augmented_L<level>.csv
    std::filesystem::path model;     // empty: <out>/model_L<level>.json
    std::filesystem::path report;    // empty: <out>/train_report_L<level>.json
    std::filesystem::path out = "out";
  } paths;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Throws FormatError (with `source_name`) on malformed JSON, unknown keys
/// or wrongly typed values.
RunConfig parse_run_config(std::string_view json_text, const std::string& source_name);

RunConfig load_run_config(const std::filesystem::path& path);

/// Full configuration as a single-line JSON document.
std::string run_config_json(const RunConfig& config);

/// Seeds derived from the run seed for each simulated record and each level.
std::uint64_t record_seed(const RunConfig& config, std::size_t height_index,
                          std::size_t channel);
std::uint64_t training_seed(const RunConfig& config, int level);

}  // namespace wheelflat
