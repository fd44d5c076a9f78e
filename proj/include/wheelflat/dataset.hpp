#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wheelflat/wheel_position.hpp"

namespace wheelflat {

/// Per-wheel encoded flat height in channel order; at most one entry is
/// non-zero.
using LabelVector = std::array<double, kChannelCount>;

inline constexpr std::size_t kHeightBins = 5;

enum class Provenance { Original, Augmented };

/// Feature/label matrices with one column per signal segment.
struct Dataset {
  int level = 0;
  Eigen::MatrixXd features;  // (4 * 2^level) x N
  Eigen::MatrixXd labels;    // 4 x N
  std::vector<Provenance> provenance;

  std::size_t size() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.rows()); }
  LabelVector label(std::size_t column) const;

  /// Throws std::invalid_argument on inconsistent shapes.
  void validate() const;
};

/// Feature width for a WPD level: 4 * 2^level.
std::size_t feature_width(int level);

/// Level implied by a feature width; throws if the width is not 4 * 2^j.
int level_for_width(std::size_t width);

/// Channel holding the non-zero label entry, or nullopt for "no defect".
std::optional<std::size_t> defect_channel(const LabelVector& label);

/// Nearest ladder height (0 = 1e-4 mm ... 4 = 1e-0 mm) of the label's
/// non-zero entry, or nullopt for "no defect".
std::optional<std::size_t> height_bin(const LabelVector& label);

/// Columns s0..s{D-1}, FL, FR, RL, RR and optionally a trailing
/// `provenance` column (original | augmented).
void write_dataset_csv(const Dataset& dataset, std::ostream& out,
                       bool with_provenance);

/// Accepts files with or without the provenance column; rows without one
/// are marked original.
Dataset read_dataset_csv(std::istream& in, const std::string& source_name);

}  // namespace wheelflat
