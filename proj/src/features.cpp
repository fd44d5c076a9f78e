#include "wheelflat/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wheelflat/hilbert.hpp"
#include "wheelflat/wpd.hpp"

namespace wheelflat {

std::size_t segment_len(const SimConfig& sim, const SegmentationConfig& seg) {
  if (seg.segment_len_override) return *seg.segment_len_override;
  return static_cast<std::size_t>(
      std::ceil(sim.sample_rate_hz * revolution_period_s(sim)));
}

SegmentSet segment(const AbaRecord& record, const SegmentationConfig& seg) {
  const std::size_t len = segment_len(record.config, seg);
  const std::size_t count = seg.segments_per_channel;
  if (len == 0 || count == 0) {
    throw std::invalid_argument("segment length and count must be positive");
  }
  if (record.size() < len * count) {
    throw std::invalid_argument("record of " + std::to_string(record.size()) +
                                " samples too short for " + std::to_string(count) +
                                " segments of " + std::to_string(len));
  }
  SegmentSet out;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto& x = record.channels[c];
    if (x.size() != record.size()) {
      throw std::invalid_argument("record channels differ in length");
    }
    out[c].reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
      const auto first = x.begin() + static_cast<std::ptrdiff_t>(r * len);
      out[c].push_back({std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len)),
                        kChannelOrder[c], r, record.flat.height_m});
    }
  }
  return out;
}

double rms(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("rms of an empty series");
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum / static_cast<double>(values.size()));
}

std::vector<double> channel_features(std::span<const double> segment, int level) {
  const auto envelope = analytic_amplitude(segment);
  const auto tree = decompose(envelope, level);
  std::vector<double> out;
  out.reserve(tree.subspaces.size());
  for (const auto& leaf : tree.subspaces) out.push_back(rms(leaf));
  return out;
}

FeatureVector extract(const std::array<SignalSegment, kChannelCount>& segments,
                      int level, const LabelVector& label) {
  FeatureVector fv;
  fv.level = level;
  fv.label = label;
  fv.values.reserve(feature_width(level));
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (!(segments[c].channel == kChannelOrder[c])) {
      throw std::invalid_argument("segments must be given in FL, FR, RL, RR order");
    }
    if (segments[c].revolution != segments[0].revolution) {
      throw std::invalid_argument("segments do not share a revolution index");
    }
    const auto block = channel_features(segments[c].samples, level);
    fv.values.insert(fv.values.end(), block.begin(), block.end());
  }
  return fv;
}

double encode_height(double height_m) {
  return (std::log10(height_m * 1e3) + 5.0) / 5.0;
}

double decode_height_mm(double encoded) {
  return std::pow(10.0, 5.0 * encoded - 5.0);
}

LabelVector encode_label(const WheelFlat& flat) {
  LabelVector label{};
  if (flat.height_m == 0.0) return label;
  // Accept the ladder end points up to rounding in their decimal spelling.
  constexpr double lo = 1e-7 * (1.0 - 1e-12);
  constexpr double hi = 1e-3 * (1.0 + 1e-12);
  if (!(flat.height_m >= lo && flat.height_m <= hi)) {
    throw std::invalid_argument("flat height " + std::to_string(flat.height_m) +
                                " m outside the encodable range [1e-7, 1e-3]");
  }
  label[channel_index(flat.location)] = encode_height(flat.height_m);
  return label;
}

std::vector<FeatureVector> extract_record(const AbaRecord& record, int level,
                                          const SegmentationConfig& seg) {
  const auto label = encode_label(record.flat);
  const auto segments = segment(record, seg);
  std::vector<FeatureVector> out;
  out.reserve(seg.segments_per_channel);
  for (std::size_t r = 0; r < seg.segments_per_channel; ++r) {
    std::array<SignalSegment, kChannelCount> aligned;
    for (std::size_t c = 0; c < kChannelCount; ++c) aligned[c] = segments[c][r];
    out.push_back(extract(aligned, level, label));
  }
  return out;
}

Dataset build_dataset(std::span<const AbaRecord> records, int level,
                      const SegmentationConfig& seg) {
  std::vector<const AbaRecord*> ordered;
  for (const auto& r : records) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const AbaRecord* a, const AbaRecord* b) {
    if (a->flat.height_m != b->flat.height_m) return a->flat.height_m < b->flat.height_m;
    return channel_index(a->flat.location) < channel_index(b->flat.location);
  });

  const auto dim = static_cast<Eigen::Index>(feature_width(level));
  const auto n = static_cast<Eigen::Index>(ordered.size() * seg.segments_per_channel);
  Dataset ds;
  ds.level = level;
  ds.features.resize(dim, n);
  ds.labels.resize(static_cast<Eigen::Index>(kChannelCount), n);
  ds.provenance.assign(static_cast<std::size_t>(n), Provenance::Original);

  Eigen::Index col = 0;
  for (const AbaRecord* record : ordered) {
    for (const auto& fv : extract_record(*record, level, seg)) {
      ds.features.col(col) = Eigen::Map<const Eigen::VectorXd>(fv.values.data(), dim);
      for (std::size_t k = 0; k < kChannelCount; ++k) {
        ds.labels(static_cast<Eigen::Index>(k), col) = fv.label[k];
      }
      ++col;
    }
  }
  return ds;
}

}  // namespace wheelflat
