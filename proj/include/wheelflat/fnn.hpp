#pragma once

// Feedforward regression network D -> 32 -> 16 -> 4.
//
//   z  = (x - mean) / stddev
//   h1 = tanh(W1 z + b1)
//   h2 = tanh(W2 h1 + b2)
//   y  = W3 h2 + b3            (linear output)
//
// Trained full batch on mean squared error with scaled conjugate gradient
// (Møller). Normalisation statistics come from the training split only.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wheelflat/dataset.hpp"

namespace wheelflat {

inline constexpr int kFnnFormatVersion = 1;
inline constexpr std::array<Eigen::Index, 2> kHiddenSizes = {32, 16};
inline constexpr Eigen::Index kOutputSize = 4;

struct TrainConfig {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;  // stop when ||∇MSE|| falls below
  double mse_goal = 0.0;             // stop when training MSE reaches this
  double validation_fraction = 0.2;
  double scg_sigma = 5e-5;    // finite-difference step for curvature
  double scg_lambda = 5e-7;   // initial Levenberg-Marquardt scale
  std::uint64_t seed = 1;
};

struct FnnModel {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
  Eigen::VectorXd mean, stddev;
  std::uint64_t seed = 0;
  TrainConfig config;

  Eigen::Index input_dim() const { return w1.cols(); }

  /// Uniform ±1/sqrt(fan_in) weights and biases, identity normalisation.
  static FnnModel initialize(Eigen::Index input_dim, std::uint64_t seed);

  /// Throws std::invalid_argument on inconsistent shapes or stddev <= 0.
  void validate() const;
};

/// Single-sample prediction. Throws std::invalid_argument on a length
/// mismatch or non-finite input.
std::array<double, kOutputSize> forward(const FnnModel& model,
                                        std::span<const double> features);

/// Batch prediction, one column per sample (4 x N).
Eigen::MatrixXd predict(const FnnModel& model, const Eigen::MatrixXd& features);

// Flat parameter vector: W1, b1, W2, b2, W3, b3 (matrices column-major).
Eigen::Index parameter_count(const FnnModel& model);
Eigen::VectorXd get_parameters(const FnnModel& model);
void set_parameters(FnnModel& model, const Eigen::VectorXd& params);

struct LossGradient {
  double mse = 0.0;
  Eigen::VectorXd gradient;
};

/// MSE averaged over all outputs and samples, on raw (unnormalised) features.
double mean_squared_error(const FnnModel& model, const Eigen::MatrixXd& features,
                          const Eigen::MatrixXd& labels);

/// MSE and its gradient with respect to the flat parameter vector.
LossGradient mse_gradient(const FnnModel& model, const Eigen::MatrixXd& features,
                          const Eigen::MatrixXd& labels);

struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population std; exact zeros replaced by 1
};

Normalization fit_normalization(const Eigen::MatrixXd& features);

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded split stratified by (height bin, defect position). Each stratum
/// sends round(fraction * size) columns to validation.
DataSplit stratified_split(const Dataset& dataset, double validation_fraction,
                           std::uint64_t seed);

struct TrainReport {
  double final_mse = 0.0;
  std::size_t iterations = 0;
  std::vector<double> mse_trajectory;  // initial MSE, then each accepted step
  DataSplit split;
  std::uint64_t seed = 0;
  std::string stop_reason;
};

struct TrainResult {
  FnnModel model;
  TrainReport report;
};

/// Throws std::invalid_argument for fewer than 100 columns or non-finite
/// features, DivergenceError if the loss or parameters become non-finite.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

void save_model(const FnnModel& model, std::ostream& out);
void save_model(const FnnModel& model, const std::filesystem::path& path);

/// Throws FormatError for malformed or truncated input and VersionError for
/// a format version other than kFnnFormatVersion.
FnnModel load_model(std::istream& in, const std::string& source_name);
FnnModel load_model(const std::filesystem::path& path);

void write_train_report(const TrainReport& report, std::ostream& out);

/// Reads the split back from a report written by write_train_report.
TrainReport read_train_report(std::istream& in, const std::string& source_name);

}  // namespace wheelflat
