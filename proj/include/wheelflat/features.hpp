#pragma once

// Revolution segmentation and RMS energy features.
//
// Per channel and revolution: envelope (analytic amplitude) -> WPD to level
// j -> RMS of each leaf. The four channel blocks are concatenated in channel
// order, giving 4 * 2^j features per revolution.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wheelflat/dataset.hpp"
#include "wheelflat/flatgen.hpp"

namespace wheelflat {

struct SegmentationConfig {
  /// One revolution spans 376.99 samples at the default operating point;
  /// 378 keeps the canonical 378 -> 8 leaf length chain.
  std::optional<std::size_t> segment_len_override = 378;
  std::size_t segments_per_channel = 25;
};

/// Override if set, else ceil(sample_rate * 2πr / v).
std::size_t segment_len(const SimConfig& sim, const SegmentationConfig& seg = {});

struct SignalSegment {
  std::vector<double> samples;
  WheelPosition channel;
  std::size_t revolution = 0;
  double flat_height_m = 0.0;
};

/// segments[c][r]: channel c, revolution r.
using SegmentSet = std::array<std::vector<SignalSegment>, kChannelCount>;

/// Consecutive non-overlapping windows from sample 0; trailing samples are
/// dropped. Throws std::invalid_argument if the record is too short.
SegmentSet segment(const AbaRecord& record, const SegmentationConfig& seg = {});

/// sqrt(mean(x^2)). Throws std::invalid_argument on empty input.
double rms(std::span<const double> values);

/// Envelope -> WPD(level) -> per-leaf RMS for one channel segment.
std::vector<double> channel_features(std::span<const double> segment, int level);

struct FeatureVector {
  std::vector<double> values;
  int level = 0;
  LabelVector label{};
};

/// Concatenated features for four aligned segments given in channel order.
/// Throws std::invalid_argument if channels are out of order or revolution
/// indices differ.
FeatureVector extract(const std::array<SignalSegment, kChannelCount>& segments,
                      int level, const LabelVector& label);

/// Encoded height (log10(h_mm) + 5) / 5: 1e-4 mm -> 0.2, 1e-0 mm -> 1.0.
double encode_height(double height_m);

/// Inverse of encode_height, in millimetres.
double decode_height_mm(double encoded);

/// Throws std::invalid_argument unless height is 0 or within [1e-7, 1e-3] m.
LabelVector encode_label(const WheelFlat& flat);

/// All revolutions of one record.
std::vector<FeatureVector> extract_record(const AbaRecord& record, int level,
                                          const SegmentationConfig& seg = {});

/// Original dataset; rows ordered by (height, defect position, revolution).
Dataset build_dataset(std::span<const AbaRecord> records, int level,
                      const SegmentationConfig& seg = {});

}  // namespace wheelflat
