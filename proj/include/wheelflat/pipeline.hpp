#pragma once

// Pipeline stages behind the command-line front end. Each cmd_* reads its
// inputs from files, writes its outputs to files and logs one line per
// artifact to `log`.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wheelflat/dataset.hpp"
#include "wheelflat/eval.hpp"
#include "wheelflat/flatgen.hpp"
#include "wheelflat/run_config.hpp"

namespace wheelflat {

inline constexpr std::string_view kVersion = "1.0.0";

/// "1e-1" for 0.1 mm, "1e-0" for 1 mm. Throws std::invalid_argument for
/// heights that are not a power of ten.
std::string height_tag(double height_mm);

/// aba_h{exp}_{POS}.csv, e.g. aba_h1e-1_FL.csv.
std::string aba_filename(double height_mm, WheelPosition position);

/// One record per (height, position) in heights_mm x channel order.
std::vector<AbaRecord> simulate_records(const RunConfig& config);

/// Output paths with the per-level defaults filled in.
std::filesystem::path features_path(const RunConfig& config);
std::filesystem::path dataset_path(const RunConfig& config);
std::filesystem::path model_path(const RunConfig& config);
std::filesystem::path report_path(const RunConfig& config);

/// Extracts, augments, trains and evaluates every level in config.levels
/// entirely in memory. Metrics are computed on each level's validation split.
MetricsTable sweep_levels(const std::vector<AbaRecord>& records, const RunConfig& config,
                          std::ostream& log);

void cmd_simulate(const RunConfig& config, std::ostream& log);
void cmd_extract(const RunConfig& config, std::ostream& log);
void cmd_augment(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_predict(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_sweep(const RunConfig& config, std::ostream& log);

}  // namespace wheelflat
