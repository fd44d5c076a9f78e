#include <cmath>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "wheelflat/eval.hpp"

using namespace wheelflat;
using Eigen::Index;
using Eigen::MatrixXd;

namespace {

// n columns cycling through every (bin, position) pair.
MatrixXd ladder_labels(std::size_t n) {
  MatrixXd y = MatrixXd::Zero(4, Index(n));
  for (std::size_t c = 0; c < n; ++c) y(Index((c / 5) % 4), Index(c)) = 0.2 * double(c % 5 + 1);
  return y;
}

}  // namespace

TEST_CASE("localize picks the largest entry, earliest on ties") {
  CHECK(localize(std::vector<double>{0.9, 0.1, 0.05, 0.0}) == kChannelOrder[0]);
  CHECK(localize(std::vector<double>{0.2, 0.2, 0.1, 0.1}) == kChannelOrder[0]);
  CHECK(localize(std::vector<double>{0.1, 0.3, 0.3, 0.2}) == kChannelOrder[1]);
  CHECK(localize(std::vector<double>{-1, -2, -0.5, -3}) == kChannelOrder[2]);
  CHECK(localize(std::vector<double>{0, 0, 0, 1e-12}) == kChannelOrder[3]);
  CHECK_THROWS_AS(localize(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("localize is scale invariant") {
  testgen::Gen gen(1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = gen.normals(4);
    auto q = p;
    const double c = std::pow(10.0, gen.uniform(-3, 3));
    for (auto& v : q) v *= c;
    CHECK(localize(q) == localize(p));
  }
}

TEST_CASE("perfect predictions score one") {
  const MatrixXd y = ladder_labels(200);
  const auto det = detection_accuracy(y, y);
  const auto loc = localization_accuracy(y, y);
  for (double a : det.accuracy) CHECK(a == 1.0);
  for (double a : loc.accuracy) CHECK(a == 1.0);
  for (auto n : det.count) CHECK(n == 40);
  for (auto n : loc.count) CHECK(n == 50);
}

TEST_CASE("full-scale error scores zero") {
  const MatrixXd y = ladder_labels(20);
  MatrixXd p = y;
  p.row(2).array() += 1.0;
  const auto det = detection_accuracy(p, y);
  for (double a : det.accuracy) CHECK(std::abs(a) < 1e-12);
}

TEST_CASE("detection accuracy matches a per-sample oracle") {
  testgen::Gen gen(3);
  const MatrixXd y = ladder_labels(300);
  MatrixXd p = y;
  for (Index c = 0; c < p.cols(); ++c)
    for (Index r = 0; r < 4; ++r) p(r, c) += 0.3 * gen.normal();
  const auto det = detection_accuracy(p, y);
  std::array<double, 5> sum{};
  std::array<int, 5> count{};
  for (Index c = 0; c < p.cols(); ++c) {
    double worst = 0.0;
    for (Index r = 0; r < 4; ++r) worst = std::max(worst, std::abs(p(r, c) - y(r, c)));
    const std::size_t bin = std::size_t(c % 5);
    sum[bin] += std::max(0.0, 1.0 - worst);
    ++count[bin];
  }
  for (std::size_t b = 0; b < 5; ++b) {
    CHECK(det.accuracy[b] == doctest::Approx(sum[b] / count[b]).epsilon(1e-12));
    CHECK(det.accuracy[b] >= 0.0);
    CHECK(det.accuracy[b] <= 1.0);
  }
}

TEST_CASE("misaligned inputs are rejected") {
  CHECK_THROWS_AS(detection_accuracy(MatrixXd::Zero(4, 3), MatrixXd::Zero(4, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(localization_accuracy(MatrixXd::Zero(3, 4), MatrixXd::Zero(4, 4)),
                  std::invalid_argument);
}

TEST_CASE("random argmax scores chance") {
  const MatrixXd y = ladder_labels(60000);
  const auto loc = localization_accuracy(random_predictions(60000, 1), y);
  for (double a : loc.accuracy) CHECK(std::abs(a - 0.25) < 0.02);
  CHECK(random_predictions(10, 5) == random_predictions(10, 5));
}

TEST_CASE("metrics table averages and csv layout") {
  testgen::Gen gen(4);
  MetricsTable table;
  for (int level = 0; level <= 6; ++level) {
    GroupAccuracy det{gen.uniforms(5, 0, 1), std::vector<std::size_t>(5, 1)};
    GroupAccuracy loc{gen.uniforms(4, 0, 1), std::vector<std::size_t>(4, 1)};
    table.add_level(level, det, loc);
  }
  for (std::size_t i = 0; i < 7; ++i) {
    double s = 0.0;
    for (double v : table.detection[i]) s += v;
    CHECK(std::abs(table.detection_average(i) - s / 5) < 1e-12);
    s = 0.0;
    for (double v : table.localization[i]) s += v;
    CHECK(std::abs(table.localization_average(i) - s / 4) < 1e-12);
  }
  std::stringstream out;
  write_metrics_csv(table, out);
  std::vector<std::string> lines;
  for (std::string line; std::getline(out, line);) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 5 + 1 + 1 + 4 + 1);
  CHECK(lines[0] == "detection_height_mm,L0,L1,L2,L3,L4,L5,L6");
  CHECK(lines[1].rfind("1e-0,", 0) == 0);
  CHECK(lines[5].rfind("1e-4,", 0) == 0);
  CHECK(lines[6].rfind("Average,", 0) == 0);
  CHECK(lines[7] == "localization_position,L0,L1,L2,L3,L4,L5,L6");
  CHECK(lines[8].rfind("Front-Left,", 0) == 0);
  CHECK(lines[12].rfind("Average,", 0) == 0);

  std::stringstream longform;
  write_metrics_long_csv(table, longform);
  std::size_t rows = 0;
  std::string line;
  std::getline(longform, line);
  CHECK(line == "metric,level,group,accuracy");
  while (std::getline(longform, line)) ++rows;
  CHECK(rows == 7 * 9);
}

TEST_CASE("empty groups are NaN and skipped in averages") {
  MetricsTable table;
  const double nan = std::nan("");
  table.add_level(0, GroupAccuracy{{1.0, nan, 0.5, nan, nan}, {1, 0, 1, 0, 0}},
                  GroupAccuracy{{1.0, 1.0, 1.0, 0.0}, {1, 1, 1, 1}});
  CHECK(table.detection_average(0) == doctest::Approx(0.75));
  CHECK_THROWS_AS(table.add_level(1, GroupAccuracy{{1.0}, {1}}, GroupAccuracy{{1.0}, {1}}),
                  std::invalid_argument);
}
