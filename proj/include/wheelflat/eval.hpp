#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "wheelflat/dataset.hpp"
#include "wheelflat/wheel_position.hpp"

namespace wheelflat {

/// Position of the largest predicted entry; ties go to the earliest channel.
WheelPosition localize(std::span<const double> prediction);

struct GroupAccuracy {
  std::vector<double> accuracy;    // NaN where a group has no samples
  std::vector<std::size_t> count;
};

/// Per height bin: mean of clamp(1 - max_i |pred_i - label_i|, 0, 1).
/// Samples without a defect label are ignored. Throws std::invalid_argument
/// on misaligned inputs.
GroupAccuracy detection_accuracy(const Eigen::MatrixXd& predictions,
                                 const Eigen::MatrixXd& labels);

/// Per true defect position: fraction of samples where localize() is right.
GroupAccuracy localization_accuracy(const Eigen::MatrixXd& predictions,
                                    const Eigen::MatrixXd& labels);

/// Detection rows per height bin (1e-0 mm first) and
/// localization rows per position, one column per WPD level.
struct MetricsTable {
  std::vector<int> levels;
  std::vector<std::array<double, kHeightBins>> detection;        // [level][bin]
  std::vector<std::array<double, kChannelCount>> localization;   // [level][position]

  void add_level(int level, const GroupAccuracy& detection_by_bin,
                 const GroupAccuracy& localization_by_position);

  /// Arithmetic mean over the non-NaN entries of a level column.
  double detection_average(std::size_t level_index) const;
  double localization_average(std::size_t level_index) const;
};

/// Two blocks: detection by height, then
/// localization by position, each with an Average row.
void write_metrics_csv(const MetricsTable& table, std::ostream& out);

/// Long format `metric,level,group,accuracy` for surface plots.
void write_metrics_long_csv(const MetricsTable& table, std::ostream& out);

/// Uniform-random predictions (4 x n) for a chance-level baseline.
Eigen::MatrixXd random_predictions(std::size_t n, std::uint64_t seed);

}  // namespace wheelflat
