#include "wheelflat/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "wheelflat/augment.hpp"
#include "wheelflat/csv.hpp"
#include "wheelflat/errors.hpp"
#include "wheelflat/features.hpp"
#include "wheelflat/fnn.hpp"

namespace wheelflat {
namespace fs = std::filesystem;

namespace {

std::size_t ladder_index(double height_mm) {
  return static_cast<std::size_t>(std::llround(std::log10(height_mm)) + 4);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  return in;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

fs::path or_default(const fs::path& given, const RunConfig& c, const std::string& stem,
                    const char* ext) {
  if (!given.empty()) return given;
  return c.paths.out / (stem + "_L" + std::to_string(c.level) + ext);
}

SimConfig record_config(const RunConfig& c, double height_mm, std::size_t channel) {
  SimConfig sim = c.simulation;
  sim.rng_seed = record_seed(c, ladder_index(height_mm), channel);
  return sim;
}

Dataset read_dataset_file(const fs::path& path) {
  auto in = open_input(path);
  return read_dataset_csv(in, path.string());
}

// Training input: the augmented set when augmentation is on, else the
// original features.
fs::path training_input(const RunConfig& c) {
  return c.augmentation_enabled ? dataset_path(c) : features_path(c);
}

Dataset select_columns(const Dataset& d, const std::vector<std::size_t>& cols) {
  Dataset out;
  out.level = d.level;
  out.features.resize(d.features.rows(), static_cast<Eigen::Index>(cols.size()));
  out.labels.resize(d.labels.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(cols[i]);
    if (cols[i] >= d.size()) throw std::out_of_range("split index exceeds dataset size");
    out.features.col(static_cast<Eigen::Index>(i)) = d.features.col(src);
    out.labels.col(static_cast<Eigen::Index>(i)) = d.labels.col(src);
    out.provenance.push_back(d.provenance[cols[i]]);
  }
  return out;
}

void add_metrics(MetricsTable& table, int level, const FnnModel& model, const Dataset& eval) {
  const Eigen::MatrixXd pred = predict(model, eval.features);
  table.add_level(level, detection_accuracy(pred, eval.labels),
                  localization_accuracy(pred, eval.labels));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string height_tag(double height_mm) {
  if (!(height_mm > 0.0)) throw std::invalid_argument("height must be positive");
  const double e = std::log10(height_mm);
  const long r = std::lround(e);
  if (std::abs(e - double(r)) > 1e-9) {
    throw std::invalid_argument("height " + csv::format_double(height_mm) +
                                " mm is not a power of ten");
  }
  return r < 0 ? "1e" + std::to_string(r) : "1e-" + std::to_string(r);
}

std::string aba_filename(double height_mm, WheelPosition position) {
  return "aba_h" + height_tag(height_mm) + "_" + std::string(position_name(position)) + ".csv";
}

fs::path features_path(const RunConfig& c) { return or_default(c.paths.features, c, "features", ".csv"); }
fs::path dataset_path(const RunConfig& c) { return or_default(c.paths.dataset, c, "augmented", ".csv"); }
fs::path model_path(const RunConfig& c) { return or_default(c.paths.model, c, "model", ".json"); }
fs::path report_path(const RunConfig& c) { return or_default(c.paths.report, c, "train_report", ".json"); }

std::vector<AbaRecord> simulate_records(const RunConfig& c) {
  std::vector<AbaRecord> records;
  for (double h : c.heights_mm) {
    for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
      const SimConfig sim = record_config(c, h, ch);
      records.push_back(synthesize(make_flat(h * 1e-3, kChannelOrder[ch], sim.wheel_radius_m), sim));
    }
  }
  return records;
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
  const auto records = simulate_records(c);
  for (const auto& r : records) {
    const fs::path path = c.paths.out / aba_filename(r.flat.height_m * 1e3, r.flat.location);
    auto out = open_output(path);
    write_aba_csv(r, out);
    close_output(out, path);
    log << "wrote " << path.string() << " (" << r.size() << " samples)\n";
  }
}

void cmd_extract(const RunConfig& c, std::ostream& log) {
  std::vector<AbaRecord> records;
  std::size_t expected_len = 0;
  fs::path first;
  for (double h : c.heights_mm) {
    for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
      const fs::path path = c.paths.signal_dir / aba_filename(h, kChannelOrder[ch]);
      auto in = open_input(path);
      AbaRecord r = read_aba_csv(in, path.string());
      if (std::abs(r.sample_rate_hz - c.simulation.sample_rate_hz) > 1e-6 * c.simulation.sample_rate_hz) {
        throw FormatError(path.string(), 0,
                          "sample rate " + csv::format_double(r.sample_rate_hz) +
                              " Hz does not match configured " +
                              csv::format_double(c.simulation.sample_rate_hz) + " Hz");
      }
      if (records.empty()) {
        expected_len = r.size();
        first = path;
      } else if (r.size() != expected_len) {
        throw FormatError(path.string(), 0,
                          "length " + std::to_string(r.size()) + " differs from " +
                              first.string() + " (" + std::to_string(expected_len) + ")");
      }
      r.config = record_config(c, h, ch);
      r.flat = make_flat(h * 1e-3, kChannelOrder[ch], r.config.wheel_radius_m);
      records.push_back(std::move(r));
    }
  }
  const Dataset ds = build_dataset(records, c.level, c.segmentation);
  const fs::path path = features_path(c);
  auto out = open_output(path);
  write_dataset_csv(ds, out, false);
  close_output(out, path);
  log << "wrote " << path.string() << " (" << ds.size() << " rows x " << ds.feature_dim()
      << " features)\n";
}

void cmd_augment(const RunConfig& c, std::ostream& log) {
  const Dataset original = read_dataset_file(features_path(c));
  const Dataset aug = augment_all(original);
  const fs::path path = dataset_path(c);
  auto out = open_output(path);
  write_dataset_csv(aug, out, true);
  close_output(out, path);
  log << "wrote " << path.string() << " (" << aug.size() << " rows)\n";
}

void cmd_train(const RunConfig& c, std::ostream& log) {
  const Dataset ds = read_dataset_file(training_input(c));
  TrainConfig tc = c.training;
  tc.seed = training_seed(c, ds.level);
  const auto start = std::chrono::steady_clock::now();
  const TrainResult result = train(ds, tc);
  log << "trained level " << ds.level << ": " << result.report.iterations
      << " iterations, mse " << csv::format_double(result.report.final_mse) << ", stop "
      << result.report.stop_reason << ", " << seconds_since(start) << " s\n";

  const fs::path mpath = model_path(c);
  auto mout = open_output(mpath);
  save_model(result.model, mout);
  close_output(mout, mpath);
  const fs::path rpath = report_path(c);
  auto rout = open_output(rpath);
  write_train_report(result.report, rout);
  close_output(rout, rpath);
  log << "wrote " << mpath.string() << "\nwrote " << rpath.string() << '\n';
}

void cmd_predict(const RunConfig& c, std::ostream& log) {
  const FnnModel model = load_model(model_path(c));
  const Dataset ds = read_dataset_file(training_input(c));
  const Eigen::MatrixXd pred = predict(model, ds.features);
  const fs::path path = c.paths.out / ("predictions_L" + std::to_string(ds.level) + ".csv");
  auto out = open_output(path);
  out << "FL,FR,RL,RR,position\n";
  for (Eigen::Index col = 0; col < pred.cols(); ++col) {
    const std::array<double, kChannelCount> p = {pred(0, col), pred(1, col), pred(2, col),
                                                 pred(3, col)};
    for (double v : p) out << csv::format_double(v) << ',';
    out << position_name(localize(p)) << '\n';
  }
  close_output(out, path);
  log << "wrote " << path.string() << " (" << pred.cols() << " rows)\n";
}

void cmd_evaluate(const RunConfig& c, std::ostream& log) {
  const FnnModel model = load_model(model_path(c));
  const Dataset ds = read_dataset_file(training_input(c));
  const fs::path rpath = report_path(c);
  Dataset eval = ds;
  if (fs::exists(rpath)) {
    auto in = open_input(rpath);
    const TrainReport report = read_train_report(in, rpath.string());
    if (!report.split.validation.empty()) eval = select_columns(ds, report.split.validation);
    log << "evaluating " << eval.size() << " validation columns from " << rpath.string() << '\n';
  } else {
    log << "no training report at " << rpath.string() << "; evaluating all " << ds.size()
        << " columns\n";
  }
  MetricsTable table;
  add_metrics(table, ds.level, model, eval);
  const fs::path path = c.paths.out / ("metrics_L" + std::to_string(ds.level) + ".csv");
  auto out = open_output(path);
  write_metrics_csv(table, out);
  close_output(out, path);
  log << "wrote " << path.string() << '\n';
}

MetricsTable sweep_levels(const std::vector<AbaRecord>& records, const RunConfig& c,
                          std::ostream& log) {
  MetricsTable table;
  for (int level : c.levels) {
    const auto start = std::chrono::steady_clock::now();
    const Dataset original = build_dataset(records, level, c.segmentation);
    const Dataset ds = c.augmentation_enabled ? augment_all(original) : original;
    TrainConfig tc = c.training;
    tc.seed = training_seed(c, level);
    const TrainResult result = train(ds, tc);
    const auto& val = result.report.split.validation;
    add_metrics(table, level, result.model, val.empty() ? ds : select_columns(ds, val));
    const std::size_t i = table.levels.size() - 1;
    log << "level " << level << ": " << ds.size() << " columns, "
        << result.report.iterations << " iterations (" << result.report.stop_reason
        << "), mse " << csv::format_double(result.report.final_mse) << ", detection "
        << table.detection_average(i) << ", localization " << table.localization_average(i)
        << ", " << seconds_since(start) << " s\n";
  }
  return table;
}

void cmd_sweep(const RunConfig& c, std::ostream& log) {
  const MetricsTable table = sweep_levels(simulate_records(c), c, log);
  const fs::path wide = c.paths.out / "metrics.csv";
  auto out = open_output(wide);
  write_metrics_csv(table, out);
  close_output(out, wide);
  const fs::path longp = c.paths.out / "metrics_long.csv";
  auto lout = open_output(longp);
  write_metrics_long_csv(table, lout);
  close_output(lout, longp);
  log << "wrote " << wide.string() << "\nwrote " << longp.string() << '\n';
}

}  // namespace wheelflat
