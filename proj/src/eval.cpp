#include "wheelflat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "wheelflat/csv.hpp"
#include "wheelflat/seed.hpp"

namespace wheelflat {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<const char*, kHeightBins> kBinNames = {"1e-4", "1e-3", "1e-2",
                                                            "1e-1", "1e-0"};
constexpr std::array<const char*, kChannelCount> kPositionNames = {
    "Front-Left", "Front-Right", "Rear-Left", "Rear-Right"};

void check_aligned(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels) {
  if (predictions.rows() != static_cast<Eigen::Index>(kChannelCount) ||
      labels.rows() != static_cast<Eigen::Index>(kChannelCount) ||
      predictions.cols() != labels.cols()) {
    throw std::invalid_argument("predictions and labels must both be 4 x N");
  }
}

GroupAccuracy finish(std::vector<double> sums, std::vector<std::size_t> counts) {
  GroupAccuracy out{std::move(sums), std::move(counts)};
  for (std::size_t g = 0; g < out.accuracy.size(); ++g) {
    out.accuracy[g] = out.count[g] ? out.accuracy[g] / double(out.count[g]) : kNaN;
  }
  return out;
}

LabelVector column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m(0, c), m(1, c), m(2, c), m(3, c)};
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n ? sum / double(n) : kNaN;
}

}  // namespace

WheelPosition localize(std::span<const double> prediction) {
  if (prediction.size() != kChannelCount) {
    throw std::invalid_argument("prediction must have 4 entries");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < kChannelCount; ++i) {
    if (prediction[i] > prediction[best]) best = i;
  }
  return kChannelOrder[best];
}

GroupAccuracy detection_accuracy(const Eigen::MatrixXd& predictions,
                                 const Eigen::MatrixXd& labels) {
  check_aligned(predictions, labels);
  std::vector<double> sums(kHeightBins, 0.0);
  std::vector<std::size_t> counts(kHeightBins, 0);
  for (Eigen::Index c = 0; c < labels.cols(); ++c) {
    const auto bin = height_bin(column(labels, c));
    if (!bin) continue;
    const double err = (predictions.col(c) - labels.col(c)).cwiseAbs().maxCoeff();
    sums[*bin] += std::clamp(1.0 - err, 0.0, 1.0);
    ++counts[*bin];
  }
  return finish(std::move(sums), std::move(counts));
}

GroupAccuracy localization_accuracy(const Eigen::MatrixXd& predictions,
                                    const Eigen::MatrixXd& labels) {
  check_aligned(predictions, labels);
  std::vector<double> sums(kChannelCount, 0.0);
  std::vector<std::size_t> counts(kChannelCount, 0);
  for (Eigen::Index c = 0; c < labels.cols(); ++c) {
    const auto truth = defect_channel(column(labels, c));
    if (!truth) continue;
    const auto pred = column(predictions, c);
    if (channel_index(localize(pred)) == *truth) sums[*truth] += 1.0;
    ++counts[*truth];
  }
  return finish(std::move(sums), std::move(counts));
}

void MetricsTable::add_level(int level, const GroupAccuracy& detection_by_bin,
                             const GroupAccuracy& localization_by_position) {
  if (detection_by_bin.accuracy.size() != kHeightBins ||
      localization_by_position.accuracy.size() != kChannelCount) {
    throw std::invalid_argument("metrics have the wrong number of groups");
  }
  levels.push_back(level);
  std::array<double, kHeightBins> det{};
  std::copy(detection_by_bin.accuracy.begin(), detection_by_bin.accuracy.end(), det.begin());
  std::array<double, kChannelCount> loc{};
  std::copy(localization_by_position.accuracy.begin(),
            localization_by_position.accuracy.end(), loc.begin());
  detection.push_back(det);
  localization.push_back(loc);
}

double MetricsTable::detection_average(std::size_t i) const {
  return mean_of(detection.at(i));
}

double MetricsTable::localization_average(std::size_t i) const {
  return mean_of(localization.at(i));
}

void write_metrics_csv(const MetricsTable& table, std::ostream& out) {
  auto header = [&](const char* first) {
    out << first;
    for (int level : table.levels) out << ",L" << level;
    out << '\n';
  };
  auto cell = [&](double v) { out << ',' << (std::isnan(v) ? "" : csv::format_double(v)); };

  header("detection_height_mm");
  for (std::size_t b = kHeightBins; b-- > 0;) {
    out << kBinNames[b];
    for (const auto& col : table.detection) cell(col[b]);
    out << '\n';
  }
  out << "Average";
  for (std::size_t i = 0; i < table.levels.size(); ++i) cell(table.detection_average(i));
  out << '\n';

  header("localization_position");
  for (std::size_t p = 0; p < kChannelCount; ++p) {
    out << kPositionNames[p];
    for (const auto& col : table.localization) cell(col[p]);
    out << '\n';
  }
  out << "Average";
  for (std::size_t i = 0; i < table.levels.size(); ++i) cell(table.localization_average(i));
  out << '\n';
}

void write_metrics_long_csv(const MetricsTable& table, std::ostream& out) {
  out << "metric,level,group,accuracy\n";
  for (std::size_t i = 0; i < table.levels.size(); ++i) {
    for (std::size_t b = kHeightBins; b-- > 0;) {
      out << "detection," << table.levels[i] << ',' << kBinNames[b] << ','
          << csv::format_double(table.detection[i][b]) << '\n';
    }
    for (std::size_t p = 0; p < kChannelCount; ++p) {
      out << "localization," << table.levels[i] << ',' << kPositionNames[p] << ','
          << csv::format_double(table.localization[i][p]) << '\n';
    }
  }
}

Eigen::MatrixXd random_predictions(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0xEA));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(kChannelCount), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = u(rng);
  }
  return out;
}

}  // namespace wheelflat
