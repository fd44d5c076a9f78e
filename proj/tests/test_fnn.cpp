#include <cmath>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "json.hpp"
#include "wheelflat/errors.hpp"
#include "wheelflat/fnn.hpp"

using namespace wheelflat;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(testgen::Gen& gen, Index rows, Index cols, double scale = 1.0) {
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = scale * gen.normal();
  return m;
}

// Two separated clusters: class 0 labelled FL = 1, class 1 labelled FR = 1.
Dataset toy_dataset(testgen::Gen& gen, std::size_t n, int level = 0) {
  const Index d = Index(feature_width(level));
  Dataset ds;
  ds.level = level;
  ds.features.resize(d, Index(n));
  ds.labels = MatrixXd::Zero(4, Index(n));
  for (Index c = 0; c < Index(n); ++c) {
    const int cls = c % 2;
    for (Index r = 0; r < d; ++r) ds.features(r, c) = (cls ? 3.0 : -3.0) + 0.3 * gen.normal();
    ds.labels(cls, c) = 1.0;
  }
  ds.provenance.assign(n, Provenance::Original);
  return ds;
}

// Dataset labelled like the pipeline: every (height bin, position) stratum.
Dataset ladder_dataset(testgen::Gen& gen, std::size_t per_stratum, int level) {
  const Index d = Index(feature_width(level));
  const std::size_t n = per_stratum * 20;
  Dataset ds;
  ds.level = level;
  ds.features = random_matrix(gen, d, Index(n));
  ds.labels = MatrixXd::Zero(4, Index(n));
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t bin = c % 5, pos = (c / 5) % 4;
    ds.labels(Index(pos), Index(c)) = 0.2 * double(bin + 1);
    ds.features(Index(pos), Index(c)) += 2.0 * double(bin + 1);
  }
  ds.provenance.assign(n, Provenance::Original);
  return ds;
}

}  // namespace

TEST_CASE("zero network outputs zero") {
  auto m = FnnModel::initialize(8, 1);
  set_parameters(m, VectorXd::Zero(parameter_count(m)));
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  for (double y : forward(m, x)) CHECK(y == 0.0);
}

TEST_CASE("small first-layer weights stay in the linear regime") {
  auto m = FnnModel::initialize(4, 1);
  set_parameters(m, VectorXd::Zero(parameter_count(m)));
  const double eps = 1e-6;
  m.w1(0, 2) = eps;
  m.w2(0, 0) = 1.0;
  m.w3(0, 0) = 1.0;
  // out_0 = tanh(tanh(eps)) ~ eps
  const auto y = forward(m, std::vector<double>{0, 0, 1, 0});
  CHECK(y[0] == doctest::Approx(eps).epsilon(1e-9));
}

TEST_CASE("forward checks its input") {
  const auto m = FnnModel::initialize(4, 1);
  CHECK_THROWS_AS(forward(m, std::vector<double>{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(forward(m, std::vector<double>{1, 2, std::nan(""), 4}), std::invalid_argument);
}

TEST_CASE("batch prediction agrees with forward") {
  testgen::Gen gen(4);
  auto m = FnnModel::initialize(8, 3);
  const MatrixXd x = random_matrix(gen, 8, 13);
  const MatrixXd y = predict(m, x);
  for (Index c = 0; c < x.cols(); ++c) {
    const auto f = forward(m, std::span<const double>(x.col(c).data(), 8));
    for (Index r = 0; r < 4; ++r) CHECK(y(r, c) == doctest::Approx(f[std::size_t(r)]).epsilon(1e-14));
  }
}

TEST_CASE("parameter vector round trip") {
  testgen::Gen gen(9);
  auto m = FnnModel::initialize(16, 2);
  CHECK(parameter_count(m) == 32 * 16 + 32 + 16 * 32 + 16 + 4 * 16 + 4);
  const VectorXd p = random_matrix(gen, parameter_count(m), 1);
  set_parameters(m, p);
  CHECK(get_parameters(m) == p);
  CHECK_THROWS_AS(set_parameters(m, VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central differences") {
  testgen::Gen gen(2024);
  const double delta = 1e-5;
  for (int trial = 0; trial < 24; ++trial) {
    const Index d = Index(gen.index(2, 8));
    const Index n = Index(gen.index(5, 30));
    auto m = FnnModel::initialize(d, gen.engine()());
    m.mean = random_matrix(gen, d, 1, 0.5);
    m.stddev = (random_matrix(gen, d, 1).array().abs() + 0.5).matrix();
    const MatrixXd x = random_matrix(gen, d, n);
    const MatrixXd y = random_matrix(gen, 4, n).cwiseAbs();

    const auto analytic = mse_gradient(m, x, y);
    CHECK(analytic.mse == doctest::Approx(mean_squared_error(m, x, y)).epsilon(1e-14));
    const VectorXd p = get_parameters(m);
    VectorXd numeric(p.size());
    auto probe = m;
    for (Index i = 0; i < p.size(); ++i) {
      VectorXd q = p;
      q(i) = p(i) + delta;
      set_parameters(probe, q);
      const double up = mean_squared_error(probe, x, y);
      q(i) = p(i) - delta;
      set_parameters(probe, q);
      const double down = mean_squared_error(probe, x, y);
      numeric(i) = (up - down) / (2 * delta);
    }
    const double rel = (analytic.gradient - numeric).norm() /
                       std::max(analytic.gradient.norm(), numeric.norm());
    CHECK(rel < 1e-5);
  }
}

TEST_CASE("loss rejects misaligned labels") {
  const auto m = FnnModel::initialize(4, 1);
  CHECK_THROWS_AS(mean_squared_error(m, MatrixXd::Zero(4, 5), MatrixXd::Zero(4, 6)),
                  std::invalid_argument);
  CHECK_THROWS_AS(mse_gradient(m, MatrixXd::Zero(4, 5), MatrixXd::Zero(3, 5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(mse_gradient(m, MatrixXd::Zero(5, 5), MatrixXd::Zero(4, 5)),
                  std::invalid_argument);
}

TEST_CASE("separable toy problem trains to low error") {
  testgen::Gen gen(77);
  const auto ds = toy_dataset(gen, 200);
  TrainConfig cfg;
  cfg.max_iterations = 500;
  cfg.validation_fraction = 0.0;
  const auto result = train(ds, cfg);
  CHECK(result.report.final_mse < 1e-3);
  CHECK(result.report.iterations <= 500);
  CHECK(result.report.final_mse ==
        doctest::Approx(mean_squared_error(result.model, ds.features, ds.labels)).epsilon(1e-9));
}

TEST_CASE("training mse never increases on accepted steps") {
  testgen::Gen gen(5);
  const auto ds = ladder_dataset(gen, 10, 1);
  TrainConfig cfg;
  cfg.max_iterations = 150;
  const auto result = train(ds, cfg);
  const auto& traj = result.report.mse_trajectory;
  REQUIRE(traj.size() >= 2);
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i] <= traj[i - 1]);
  CHECK(traj.back() == result.report.final_mse);
}

TEST_CASE("zero-variance column trains with unit stddev") {
  testgen::Gen gen(6);
  auto ds = toy_dataset(gen, 120, 1);
  ds.features.row(3).setConstant(2.5);
  TrainConfig cfg;
  cfg.max_iterations = 50;
  const auto result = train(ds, cfg);
  CHECK(result.model.stddev(3) == 1.0);
  CHECK(get_parameters(result.model).allFinite());
}

TEST_CASE("normalisation uses training-split population statistics") {
  testgen::Gen gen(10);
  auto ds = ladder_dataset(gen, 10, 2);
  ds.features.row(5).setZero();
  TrainConfig cfg;
  cfg.max_iterations = 1;
  const auto result = train(ds, cfg);
  MatrixXd x(ds.features.rows(), Index(result.report.split.train.size()));
  for (std::size_t i = 0; i < result.report.split.train.size(); ++i) {
    x.col(Index(i)) = ds.features.col(Index(result.report.split.train[i]));
  }
  const MatrixXd z = (x.colwise() - result.model.mean).array().colwise() /
                     result.model.stddev.array();
  for (Index r = 0; r < z.rows(); ++r) {
    const double mean = z.row(r).mean();
    const double sd = std::sqrt((z.row(r).array() - mean).square().mean());
    CHECK(std::abs(mean) < 1e-9);
    if (r != 5) CHECK(std::abs(sd - 1.0) < 1e-9);
  }
}

TEST_CASE("stratified split") {
  testgen::Gen gen(11);
  const auto ds = ladder_dataset(gen, 10, 0);
  const auto split = stratified_split(ds, 0.2, 42);
  CHECK(split.validation.size() == 40);
  CHECK(split.train.size() == 160);
  std::vector<int> seen(ds.size(), 0);
  for (auto i : split.train) ++seen[i];
  for (auto i : split.validation) ++seen[i];
  for (int s : seen) CHECK(s == 1);
  std::map<std::pair<std::size_t, std::size_t>, int> per_stratum;
  for (auto i : split.validation) {
    const auto l = ds.label(i);
    ++per_stratum[{*height_bin(l), *defect_channel(l)}];
  }
  CHECK(per_stratum.size() == 20);
  for (const auto& [key, count] : per_stratum) CHECK(count == 2);
  const auto again = stratified_split(ds, 0.2, 42);
  CHECK(again.validation == split.validation);
  const auto other = stratified_split(ds, 0.2, 43);
  CHECK(other.validation != split.validation);
}

TEST_CASE("training is deterministic") {
  testgen::Gen gen(12);
  const auto ds = ladder_dataset(gen, 8, 1);
  TrainConfig cfg;
  cfg.max_iterations = 40;
  cfg.seed = 99;
  const auto a = train(ds, cfg);
  const auto b = train(ds, cfg);
  CHECK(get_parameters(a.model) == get_parameters(b.model));
  CHECK(a.report.mse_trajectory == b.report.mse_trajectory);
  CHECK(a.report.split.validation == b.report.split.validation);
}

TEST_CASE("duplicating every column leaves training unchanged") {
  testgen::Gen gen(13);
  const auto ds = ladder_dataset(gen, 6, 1);
  Dataset twice = ds;
  twice.features.resize(ds.features.rows(), 2 * ds.features.cols());
  twice.labels.resize(4, 2 * ds.labels.cols());
  twice.features << ds.features, ds.features;
  twice.labels << ds.labels, ds.labels;
  twice.provenance.insert(twice.provenance.end(), ds.provenance.begin(), ds.provenance.end());
  TrainConfig cfg;
  cfg.max_iterations = 60;
  cfg.validation_fraction = 0.0;
  const auto a = train(ds, cfg);
  const auto b = train(twice, cfg);
  // Only the summation order differs, so agreement is to rounding.
  const VectorXd pa = get_parameters(a.model), pb = get_parameters(b.model);
  CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(a.report.iterations == b.report.iterations);
}

TEST_CASE("training input validation") {
  testgen::Gen gen(14);
  CHECK_THROWS_AS(train(toy_dataset(gen, 99), TrainConfig{}), std::invalid_argument);
  auto ds = toy_dataset(gen, 120);
  ds.features(1, 7) = std::nan("");
  CHECK_THROWS_AS(train(ds, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("model file round trip is bit exact") {
  testgen::Gen gen(15);
  const auto ds = ladder_dataset(gen, 6, 2);
  TrainConfig cfg;
  cfg.max_iterations = 20;
  const auto model = train(ds, cfg).model;
  std::stringstream buf;
  save_model(model, buf);
  const auto text = buf.str();
  CHECK(text.find("\"version\": 1") != std::string::npos);
  const auto back = load_model(buf, "mem.json");
  CHECK(get_parameters(back) == get_parameters(model));
  CHECK(back.mean == model.mean);
  CHECK(back.stddev == model.stddev);
  CHECK(predict(back, ds.features) == predict(model, ds.features));

  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(truncated, "cut.json"), FormatError);

  auto j = nlohmann::json::parse(text);
  j["version"] = 7;
  std::stringstream wrong(j.dump());
  try {
    load_model(wrong, "v7.json");
    FAIL("expected VersionError");
  } catch (const VersionError& e) {
    CHECK(e.expected() == 1);
    CHECK(e.found() == 7);
    CHECK(std::string(e.what()).find("expected 1, found 7") != std::string::npos);
  }

  j = nlohmann::json::parse(text);
  j["layers"][1]["bias"].erase(0);
  std::stringstream shape(j.dump());
  CHECK_THROWS_AS(load_model(shape, "shape.json"), FormatError);
}

TEST_CASE("train report round trip") {
  TrainReport r;
  r.final_mse = 0.125;
  r.iterations = 3;
  r.mse_trajectory = {0.5, 0.25, 0.125};
  r.split.train = {0, 2, 3};
  r.split.validation = {1};
  r.seed = 8;
  r.stop_reason = "max_iterations";
  std::stringstream buf;
  write_train_report(r, buf);
  const auto back = read_train_report(buf, "r.json");
  CHECK(back.mse_trajectory == r.mse_trajectory);
  CHECK(back.split.validation == r.split.validation);
  CHECK(back.split.train == r.split.train);
  CHECK(back.seed == 8);
  std::stringstream bad("{\"final_mse\": 1}");
  CHECK_THROWS_AS(read_train_report(bad, "bad.json"), FormatError);
}
