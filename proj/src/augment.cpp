#include "wheelflat/augment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wheelflat {
namespace {

constexpr double kLadderStep = 0.2;  // encoded-label distance between heights

void check_set(std::span<const FeatureVector> set, std::size_t channel, int level,
               std::size_t dim, double encoded, const char* which) {
  for (const auto& fv : set) {
    const auto c = defect_channel(fv.label);
    if (!c || *c != channel) {
      throw std::invalid_argument(std::string(which) + " set mixes defect positions");
    }
    if (fv.level != level || fv.values.size() != dim) {
      throw std::invalid_argument(std::string(which) + " set mixes WPD levels");
    }
    if (std::abs(fv.label[channel] - encoded) > 1e-9) {
      throw std::invalid_argument(std::string(which) + " set mixes flat heights");
    }
  }
}

}  // namespace

std::array<double, kInterpolationPoints> interpolation_points() {
  return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
}

std::vector<FeatureVector> augment_gap(std::span<const FeatureVector> lower,
                                       std::span<const FeatureVector> upper,
                                       double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("mixing weight must lie in [0, 1]");
  }
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("augmentation sets must be non-empty and equal in size");
  }
  const auto channel = defect_channel(lower.front().label);
  if (!channel) throw std::invalid_argument("augmentation needs defect labels");
  const int level = lower.front().level;
  const std::size_t dim = lower.front().values.size();
  const double y_lower = lower.front().label[*channel];
  const double y_upper = upper.front().label[*channel];
  check_set(lower, *channel, level, dim, y_lower, "lower");
  check_set(upper, *channel, level, dim, y_lower + kLadderStep, "upper");

  const double label = (1.0 - alpha) * y_lower + alpha * y_upper;
  std::vector<FeatureVector> out;
  out.reserve(lower.size() * upper.size());
  for (const auto& a : lower) {
    for (const auto& b : upper) {
      FeatureVector fv;
      fv.level = level;
      fv.label[*channel] = label;
      fv.values.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        fv.values[i] = (1.0 - alpha) * a.values[i] + alpha * b.values[i];
      }
      out.push_back(std::move(fv));
    }
  }
  return out;
}

Dataset augment_all(const Dataset& original) {
  original.validate();
  // groups[position][height bin] -> original feature vectors
  std::array<std::array<std::vector<FeatureVector>, kHeightBins>, kChannelCount> groups;
  for (std::size_t col = 0; col < original.size(); ++col) {
    const auto label = original.label(col);
    const auto channel = defect_channel(label);
    const auto bin = height_bin(label);
    if (!channel || !bin) {
      throw std::invalid_argument("column " + std::to_string(col) +
                                  " has no defect label; cannot augment");
    }
    if (std::abs(label[*channel] - kLadderStep * double(*bin + 1)) > 1e-9) {
      throw std::invalid_argument("column " + std::to_string(col) +
                                  " is not at a ladder height");
    }
    FeatureVector fv;
    fv.level = original.level;
    fv.label = label;
    const auto& f = original.features.col(static_cast<Eigen::Index>(col));
    fv.values.assign(f.data(), f.data() + f.size());
    groups[*channel][*bin].push_back(std::move(fv));
  }
  const std::size_t per_group = groups[0][0].size();
  for (const auto& by_height : groups) {
    for (const auto& g : by_height) {
      if (g.empty() || g.size() != per_group) {
        throw std::invalid_argument(
            "original dataset needs equal, non-empty groups for every height and position");
      }
    }
  }

  const auto alphas = interpolation_points();
  const std::size_t pairs = per_group * per_group;
  const std::size_t total = (kHeightBins - 1) * alphas.size() * pairs * kChannelCount;
  const auto dim = static_cast<Eigen::Index>(original.feature_dim());

  Dataset out;
  out.level = original.level;
  out.features.resize(dim, static_cast<Eigen::Index>(total));
  out.labels.setZero(static_cast<Eigen::Index>(kChannelCount), static_cast<Eigen::Index>(total));
  out.provenance.resize(total);

  std::size_t col = 0;
  for (std::size_t gap = 0; gap + 1 < kHeightBins; ++gap) {
    for (double alpha : alphas) {
      std::array<std::vector<FeatureVector>, kChannelCount> mixed;
      for (std::size_t p = 0; p < kChannelCount; ++p) {
        mixed[p] = augment_gap(groups[p][gap], groups[p][gap + 1], alpha);
      }
      const bool endpoint = alpha == 0.0 || alpha == 1.0;
      for (std::size_t pair = 0; pair < pairs; ++pair) {
        for (std::size_t p = 0; p < kChannelCount; ++p) {
          const auto& fv = mixed[p][pair];
          const auto c = static_cast<Eigen::Index>(col);
          out.features.col(c) = Eigen::Map<const Eigen::VectorXd>(fv.values.data(), dim);
          for (std::size_t k = 0; k < kChannelCount; ++k) {
            out.labels(static_cast<Eigen::Index>(k), c) = fv.label[k];
          }
          out.provenance[col] = endpoint ? Provenance::Original : Provenance::Augmented;
          ++col;
        }
      }
    }
  }
  return out;
}

}  // namespace wheelflat
