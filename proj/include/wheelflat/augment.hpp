#pragma once

// Interpolation-based augmentation between adjacent ladder heights.
//
// For each defect position and each gap (hA, hB = 10 hA) every ordered pair
// (a, b) of the two 25-segment sets is mixed as (1 - α) a + α b at six
// points α = 0, 0.2, ..., 1. Labels mix linearly in the encoded (log10)
// height, so α = 0.4 across the 1e-1 / 1e-0 mm gap labels 1e-0.6 mm.
// 4 gaps x 6 points x 625 pairs x 4 positions = 60,000 columns.

#include <array>
#include <span>
#include <vector>

#include "wheelflat/dataset.hpp"
#include "wheelflat/features.hpp"

namespace wheelflat {

inline constexpr std::size_t kInterpolationPoints = 6;

/// Mixing weights 0, 0.2, 0.4, 0.6, 0.8, 1.
std::array<double, kInterpolationPoints> interpolation_points();

/// All |lower| x |upper| mixtures at one α, ordered by (lower index, upper
/// index). `lower` must sit one ladder step below `upper` at the same defect
/// position and level. Throws std::invalid_argument otherwise.
std::vector<FeatureVector> augment_gap(std::span<const FeatureVector> lower,
                                       std::span<const FeatureVector> upper,
                                       double alpha);

/// Expands an original dataset (equal-sized groups for all 5 heights at all 4
/// positions). Columns are ordered by (gap, α, pair index, position); α = 0
/// and α = 1 columns are copies of originals and keep that provenance.
Dataset augment_all(const Dataset& original);

}  // namespace wheelflat
