#include "wheelflat/fnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "wheelflat/errors.hpp"
#include "wheelflat/seed.hpp"

namespace wheelflat {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

// tanh through the vectorised exp; Eigen's double tanh is scalar and
// dominated training time. Absolute error stays below 1e-15.
template <typename Derived>
MatrixXd tanh_of(const Eigen::MatrixBase<Derived>& x) {
  return (1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0)).matrix();
}

MatrixXd network_outputs(const FnnModel& m, const MatrixXd& z) {
  const MatrixXd h1 = tanh_of((m.w1 * z).colwise() + m.b1);
  const MatrixXd h2 = tanh_of((m.w2 * h1).colwise() + m.b2);
  return (m.w3 * h2).colwise() + m.b3;
}

// Loss on pre-normalised inputs; the training loop calls this directly so
// the normalisation is applied once. Columns are processed in fixed-size
// blocks so the hidden activations stay in cache; the block order is fixed,
// so results are deterministic.
class Objective {
 public:
  Objective(const MatrixXd& inputs, const MatrixXd& targets)
      : z_(inputs), y_(targets) {}

  double loss(const FnnModel& m) const { return run(m, nullptr); }

  LossGradient loss_gradient(const FnnModel& m) const {
    FnnModel g;
    g.w1 = MatrixXd::Zero(m.w1.rows(), m.w1.cols());
    g.b1 = VectorXd::Zero(m.b1.size());
    g.w2 = MatrixXd::Zero(m.w2.rows(), m.w2.cols());
    g.b2 = VectorXd::Zero(m.b2.size());
    g.w3 = MatrixXd::Zero(m.w3.rows(), m.w3.cols());
    g.b3 = VectorXd::Zero(m.b3.size());
    LossGradient lg;
    lg.mse = run(m, &g);
    lg.gradient = get_parameters(g);
    return lg;
  }

 private:
  static constexpr Index kBlock = 256;

  double run(const FnnModel& m, FnnModel* g) const {
    const Index n = z_.cols();
    const double scale = 2.0 / static_cast<double>(y_.size());
    MatrixXd h1(m.w1.rows(), kBlock), h2(m.w2.rows(), kBlock), err(m.w3.rows(), kBlock);
    MatrixXd d1(m.w1.rows(), kBlock), d2(m.w2.rows(), kBlock);
    double sum = 0.0;
    for (Index start = 0; start < n; start += kBlock) {
      const Index nb = std::min(kBlock, n - start);
      const auto zb = z_.middleCols(start, nb);
      auto a1 = h1.leftCols(nb);
      auto a2 = h2.leftCols(nb);
      auto e = err.leftCols(nb);
      a1.noalias() = m.w1 * zb;
      a1.colwise() += m.b1;
      a1.array() = 1.0 - 2.0 / ((2.0 * a1.array()).exp() + 1.0);
      a2.noalias() = m.w2 * a1;
      a2.colwise() += m.b2;
      a2.array() = 1.0 - 2.0 / ((2.0 * a2.array()).exp() + 1.0);
      e.noalias() = m.w3 * a2;
      e.colwise() += m.b3;
      e -= y_.middleCols(start, nb);
      sum += e.squaredNorm();
      if (!g) continue;

      e *= scale;
      auto g2 = d2.leftCols(nb);
      auto g1 = d1.leftCols(nb);
      g2.noalias() = m.w3.transpose() * e;
      g2.array() *= 1.0 - a2.array().square();
      g1.noalias() = m.w2.transpose() * g2;
      g1.array() *= 1.0 - a1.array().square();
      g->w3.noalias() += e * a2.transpose();
      g->b3 += e.rowwise().sum();
      g->w2.noalias() += g2 * a1.transpose();
      g->b2 += g2.rowwise().sum();
      g->w1.noalias() += g1 * zb.transpose();
      g->b1 += g1.rowwise().sum();
    }
    return sum / static_cast<double>(y_.size());
  }

  const MatrixXd& z_;
  const MatrixXd& y_;
};

MatrixXd normalize(const FnnModel& m, const MatrixXd& x) {
  if (x.rows() != m.input_dim()) {
    throw std::invalid_argument("feature rows " + std::to_string(x.rows()) +
                                " != model input " + std::to_string(m.input_dim()));
  }
  return (x.colwise() - m.mean).array().colwise() / m.stddev.array();
}

void check_labels(const MatrixXd& features, const MatrixXd& labels) {
  if (labels.rows() != kOutputSize || labels.cols() != features.cols() || labels.cols() == 0) {
    throw std::invalid_argument("labels must be 4 x N with N matching the feature columns");
  }
}

MatrixXd gather(const MatrixXd& m, const std::vector<std::size_t>& cols) {
  MatrixXd out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Index>(i)) = m.col(static_cast<Index>(cols[i]));
  }
  return out;
}

}  // namespace

FnnModel FnnModel::initialize(Index input_dim, std::uint64_t seed) {
  if (input_dim <= 0) throw std::invalid_argument("input dimension must be positive");
  std::mt19937_64 rng(derive_seed(seed, 0xF1));
  auto fill = [&rng](Index rows, Index cols, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    MatrixXd m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    }
    return m;
  };
  FnnModel m;
  m.w1 = fill(kHiddenSizes[0], input_dim, input_dim);
  m.b1 = fill(kHiddenSizes[0], 1, input_dim);
  m.w2 = fill(kHiddenSizes[1], kHiddenSizes[0], kHiddenSizes[0]);
  m.b2 = fill(kHiddenSizes[1], 1, kHiddenSizes[0]);
  m.w3 = fill(kOutputSize, kHiddenSizes[1], kHiddenSizes[1]);
  m.b3 = fill(kOutputSize, 1, kHiddenSizes[1]);
  m.mean = VectorXd::Zero(input_dim);
  m.stddev = VectorXd::Ones(input_dim);
  m.seed = seed;
  return m;
}

void FnnModel::validate() const {
  const Index d = input_dim();
  const bool ok = d > 0 && w1.rows() == kHiddenSizes[0] && b1.size() == kHiddenSizes[0] &&
                  w2.rows() == kHiddenSizes[1] && w2.cols() == kHiddenSizes[0] &&
                  b2.size() == kHiddenSizes[1] && w3.rows() == kOutputSize &&
                  w3.cols() == kHiddenSizes[1] && b3.size() == kOutputSize &&
                  mean.size() == d && stddev.size() == d;
  if (!ok) throw std::invalid_argument("inconsistent network shapes");
  if ((stddev.array() <= 0.0).any()) {
    throw std::invalid_argument("normalisation stddev must be positive");
  }
}

std::array<double, kOutputSize> forward(const FnnModel& model,
                                        std::span<const double> features) {
  if (static_cast<Index>(features.size()) != model.input_dim()) {
    throw std::invalid_argument("expected " + std::to_string(model.input_dim()) +
                                " features, got " + std::to_string(features.size()));
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
  const Eigen::Map<const VectorXd> x(features.data(), model.input_dim());
  const VectorXd z = (x - model.mean).cwiseQuotient(model.stddev);
  const VectorXd h1 = tanh_of(model.w1 * z + model.b1);
  const VectorXd h2 = tanh_of(model.w2 * h1 + model.b2);
  const VectorXd y = model.w3 * h2 + model.b3;
  return {y(0), y(1), y(2), y(3)};
}

MatrixXd predict(const FnnModel& model, const MatrixXd& features) {
  if (!all_finite(features)) throw std::invalid_argument("non-finite feature value");
  return network_outputs(model, normalize(model, features));
}

Index parameter_count(const FnnModel& m) {
  return m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size() + m.w3.size() +
         m.b3.size();
}

VectorXd get_parameters(const FnnModel& m) {
  VectorXd p(parameter_count(m));
  Index at = 0;
  auto put = [&](const auto& block) {
    p.segment(at, block.size()) = Eigen::Map<const VectorXd>(block.data(), block.size());
    at += block.size();
  };
  put(m.w1); put(m.b1); put(m.w2); put(m.b2); put(m.w3); put(m.b3);
  return p;
}

void set_parameters(FnnModel& m, const VectorXd& p) {
  if (p.size() != parameter_count(m)) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  Index at = 0;
  auto take = [&](auto& block) {
    Eigen::Map<VectorXd>(block.data(), block.size()) = p.segment(at, block.size());
    at += block.size();
  };
  take(m.w1); take(m.b1); take(m.w2); take(m.b2); take(m.w3); take(m.b3);
}

double mean_squared_error(const FnnModel& model, const MatrixXd& features,
                          const MatrixXd& labels) {
  check_labels(features, labels);
  const MatrixXd z = normalize(model, features);
  return Objective(z, labels).loss(model);
}

LossGradient mse_gradient(const FnnModel& model, const MatrixXd& features,
                          const MatrixXd& labels) {
  check_labels(features, labels);
  const MatrixXd z = normalize(model, features);
  return Objective(z, labels).loss_gradient(model);
}

Normalization fit_normalization(const MatrixXd& features) {
  if (features.cols() == 0) throw std::invalid_argument("no columns to normalise");
  const double n = static_cast<double>(features.cols());
  Normalization out;
  out.mean = features.rowwise().sum() / n;
  out.stddev =
      ((features.colwise() - out.mean).array().square().rowwise().sum() / n).sqrt();
  for (Index i = 0; i < out.stddev.size(); ++i) {
    if (out.stddev(i) == 0.0) out.stddev(i) = 1.0;
  }
  return out;
}

DataSplit stratified_split(const Dataset& dataset, double validation_fraction,
                           std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  }
  // Stratum key: (height bin, position); "no defect" gets its own key.
  std::map<std::size_t, std::vector<std::size_t>> strata;
  for (std::size_t col = 0; col < dataset.size(); ++col) {
    const auto label = dataset.label(col);
    const auto bin = height_bin(label);
    const auto pos = defect_channel(label);
    const std::size_t key = bin ? (*bin * kChannelCount + *pos) : kHeightBins * kChannelCount;
    strata[key].push_back(col);
  }
  std::mt19937_64 rng(derive_seed(seed, 0x5A));
  DataSplit split;
  for (auto& [key, cols] : strata) {
    for (std::size_t i = cols.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(cols[i - 1], cols[pick(rng)]);
    }
    const auto n_val = static_cast<std::size_t>(
        std::llround(validation_fraction * static_cast<double>(cols.size())));
    split.validation.insert(split.validation.end(), cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.insert(split.train.end(), cols.begin() + static_cast<std::ptrdiff_t>(n_val), cols.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  dataset.validate();
  if (dataset.size() < 100) {
    throw std::invalid_argument("training needs at least 100 columns, got " +
                                std::to_string(dataset.size()));
  }
  if (!all_finite(dataset.features) || !all_finite(dataset.labels)) {
    throw std::invalid_argument("dataset contains non-finite values");
  }

  TrainResult result;
  TrainReport& report = result.report;
  report.seed = config.seed;
  report.split = stratified_split(dataset, config.validation_fraction, config.seed);

  const MatrixXd x_train = gather(dataset.features, report.split.train);
  const MatrixXd y_train = gather(dataset.labels, report.split.train);

  FnnModel& model = result.model;
  model = FnnModel::initialize(dataset.features.rows(), config.seed);
  model.config = config;
  const auto norm = fit_normalization(x_train);
  model.mean = norm.mean;
  model.stddev = norm.stddev;

  const MatrixXd z = normalize(model, x_train);
  const Objective objective(z, y_train);
  FnnModel trial = model;
  auto eval_at = [&](const VectorXd& w) {
    set_parameters(trial, w);
    return objective.loss_gradient(trial);
  };

  // Scaled conjugate gradient, Møller (1993).
  VectorXd w = get_parameters(model);
  LossGradient current = eval_at(w);
  if (!std::isfinite(current.mse)) throw DivergenceError("initial loss is not finite");
  VectorXd r = -current.gradient;
  VectorXd p = r;
  const Index n_params = w.size();
  double lambda = config.scg_lambda;
  double lambda_bar = 0.0;
  double delta = 0.0;
  bool success = true;
  constexpr double kLambdaMax = 1e20;
  report.mse_trajectory.push_back(current.mse);
  report.stop_reason = "max_iterations";

  std::size_t k = 0;
  for (; k < config.max_iterations; ++k) {
    if (current.mse <= config.mse_goal) {
      report.stop_reason = "mse_goal";
      break;
    }
    if (r.norm() < config.gradient_tolerance) {
      report.stop_reason = "gradient_tolerance";
      break;
    }
    double p_norm2 = p.squaredNorm();
    double mu = p.dot(r);
    if (mu <= 0.0) {
      // Lost conjugacy: restart along steepest descent.
      p = r;
      p_norm2 = p.squaredNorm();
      mu = p_norm2;
      success = true;
    }
    if (success) {
      const double sigma_k = config.scg_sigma / std::sqrt(p_norm2);
      const VectorXd g_shift = eval_at(w + sigma_k * p).gradient;
      const VectorXd s = (g_shift - current.gradient) / sigma_k;
      delta = p.dot(s);
    }
    delta += (lambda - lambda_bar) * p_norm2;
    if (delta <= 0.0) {
      lambda_bar = 2.0 * (lambda - delta / p_norm2);
      delta = -delta + lambda * p_norm2;
      lambda = lambda_bar;
    }
    const double alpha = mu / delta;
    const VectorXd w_new = w + alpha * p;
    LossGradient next = eval_at(w_new);
    const double comparison = 2.0 * delta * (current.mse - next.mse) / (mu * mu);

    if (std::isfinite(next.mse) && comparison >= 0.0) {
      const VectorXd r_new = -next.gradient;
      w = w_new;
      current = std::move(next);
      lambda_bar = 0.0;
      success = true;
      if ((k + 1) % static_cast<std::size_t>(n_params) == 0) {
        p = r_new;
      } else {
        const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
        p = r_new + beta * p;
      }
      r = r_new;
      if (comparison >= 0.75) lambda *= 0.25;
      report.mse_trajectory.push_back(current.mse);
    } else {
      lambda_bar = lambda;
      success = false;
    }
    if (!(comparison >= 0.25)) {
      lambda += delta * (1.0 - (std::isfinite(comparison) ? comparison : 0.0)) / p_norm2;
    }
    lambda = std::min(lambda, kLambdaMax);
  }

  set_parameters(model, w);
  if (!get_parameters(model).allFinite()) throw DivergenceError("parameters are not finite");
  report.iterations = k;
  report.final_mse = current.mse;
  return result;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

json matrix_json(const MatrixXd& m) {
  std::vector<double> row_major;
  row_major.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) row_major.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", row_major}};
}

MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto values = j.at("values").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Index>(values.size()) != rows * cols) {
    throw std::invalid_argument("matrix value count does not match its shape");
  }
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) m(i, c) = values[static_cast<std::size_t>(i * cols + c)];
  }
  return m;
}

json vector_json(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

json config_json(const TrainConfig& c) {
  return {{"max_iterations", c.max_iterations},
          {"gradient_tolerance", c.gradient_tolerance},
          {"mse_goal", c.mse_goal},
          {"validation_fraction", c.validation_fraction},
          {"scg_sigma", c.scg_sigma},
          {"scg_lambda", c.scg_lambda},
          {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.max_iterations = j.at("max_iterations").get<std::size_t>();
  c.gradient_tolerance = j.at("gradient_tolerance").get<double>();
  c.mse_goal = j.at("mse_goal").get<double>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.scg_sigma = j.at("scg_sigma").get<double>();
  c.scg_lambda = j.at("scg_lambda").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_model(const FnnModel& model, std::ostream& out) {
  model.validate();
  json j;
  j["format"] = "wheelflat-fnn";
  j["version"] = kFnnFormatVersion;
  j["layer_sizes"] = {model.input_dim(), kHiddenSizes[0], kHiddenSizes[1], kOutputSize};
  j["seed"] = model.seed;
  j["normalization"] = {{"mean", vector_json(model.mean)},
                        {"stddev", vector_json(model.stddev)}};
  j["layers"] = json::array({
      {{"weights", matrix_json(model.w1)}, {"bias", vector_json(model.b1)}},
      {{"weights", matrix_json(model.w2)}, {"bias", vector_json(model.b2)}},
      {{"weights", matrix_json(model.w3)}, {"bias", vector_json(model.b3)}},
  });
  j["training"] = config_json(model.config);
  out << j.dump(1) << '\n';
}

void save_model(const FnnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_model(model, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

FnnModel load_model(std::istream& in, const std::string& source_name) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(source_name, 0, std::string("malformed model file: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "wheelflat-fnn") {
      throw FormatError(source_name, 0, "not a wheelflat model file");
    }
    const int version = j.at("version").get<int>();
    if (version != kFnnFormatVersion) {
      throw VersionError(source_name, kFnnFormatVersion, version);
    }
    FnnModel m;
    const auto& layers = j.at("layers");
    if (layers.size() != 3) throw std::invalid_argument("expected 3 layers");
    m.w1 = matrix_from_json(layers[0].at("weights"));
    m.b1 = vector_from_json(layers[0].at("bias"));
    m.w2 = matrix_from_json(layers[1].at("weights"));
    m.b2 = vector_from_json(layers[1].at("bias"));
    m.w3 = matrix_from_json(layers[2].at("weights"));
    m.b3 = vector_from_json(layers[2].at("bias"));
    m.mean = vector_from_json(j.at("normalization").at("mean"));
    m.stddev = vector_from_json(j.at("normalization").at("stddev"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = config_from_json(j.at("training"));
    const auto sizes = j.at("layer_sizes").get<std::vector<Index>>();
    const std::vector<Index> expected = {m.input_dim(), kHiddenSizes[0], kHiddenSizes[1],
                                         kOutputSize};
    if (sizes != expected) throw std::invalid_argument("layer_sizes disagree with weights");
    m.validate();
    return m;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(source_name, 0, std::string("invalid model: ") + e.what());
  }
}

FnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), 0, "cannot open model file");
  return load_model(in, path.string());
}

void write_train_report(const TrainReport& report, std::ostream& out) {
  json j;
  j["final_mse"] = report.final_mse;
  j["iterations"] = report.iterations;
  j["stop_reason"] = report.stop_reason;
  j["seed"] = report.seed;
  j["mse_trajectory"] = report.mse_trajectory;
  j["train_indices"] = report.split.train;
  j["validation_indices"] = report.split.validation;
  out << j.dump(1) << '\n';
}

TrainReport read_train_report(std::istream& in, const std::string& source_name) {
  try {
    const json j = json::parse(in);
    TrainReport r;
    r.final_mse = j.at("final_mse").get<double>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.stop_reason = j.at("stop_reason").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mse_trajectory = j.at("mse_trajectory").get<std::vector<double>>();
    r.split.train = j.at("train_indices").get<std::vector<std::size_t>>();
    r.split.validation = j.at("validation_indices").get<std::vector<std::size_t>>();
    return r;
  } catch (const std::exception& e) {
    throw FormatError(source_name, 0, std::string("invalid train report: ") + e.what());
  }
}

}  // namespace wheelflat
