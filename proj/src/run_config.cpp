#include "wheelflat/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "wheelflat/errors.hpp"
#include "wheelflat/seed.hpp"

namespace wheelflat {

using nlohmann::json;

namespace {

// Reads fields out of one JSON object and remembers which keys were used so
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument(where_ + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      target = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument(where_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw std::invalid_argument("unknown key " + where_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_simulation(const json& j, SimConfig& sim) {
  ObjectReader r(j, "simulation");
  r.read("wheel_radius_m", sim.wheel_radius_m);
  r.read("speed_m_per_s", sim.speed_m_per_s);
  r.read("sample_rate_hz", sim.sample_rate_hz);
  r.read("duration_s", sim.duration_s);
  r.read("upper_anchor_height_m", sim.upper_anchor_height_m);
  r.read("upper_anchor_peak_g", sim.upper_anchor_peak_g);
  r.read("lower_anchor_height_m", sim.lower_anchor_height_m);
  r.read("lower_anchor_peak_g", sim.lower_anchor_peak_g);
  r.read("opposite_wheel_factor", sim.opposite_wheel_factor);
  r.read("other_wheelset_factor", sim.other_wheelset_factor);
  r.read("other_wheelset_delay_rev", sim.other_wheelset_delay_rev);
  r.read("impact_phase_rev", sim.impact_phase_rev);
  r.read("noise_fraction", sim.noise_fraction);
  r.read("revolution_gain_jitter", sim.revolution_gain_jitter);
  if (const json* modes = r.child("ringing_modes")) {
    if (!modes->is_array()) throw std::invalid_argument("simulation.ringing_modes must be an array");
    sim.ringing_modes.clear();
    for (const auto& m : *modes) {
      ObjectReader mr(m, "simulation.ringing_modes[]");
      RingingMode mode;
      mr.read("frequency_hz", mode.frequency_hz);
      mr.read("damping_ratio", mode.damping_ratio);
      mr.read("opposite_wheel_gain", mode.opposite_wheel_gain);
      mr.read("other_wheelset_gain", mode.other_wheelset_gain);
      mr.finish();
      sim.ringing_modes.push_back(mode);
    }
  }
  r.finish();
}

void read_training(const json& j, TrainConfig& t) {
  ObjectReader r(j, "training");
  r.read("max_iterations", t.max_iterations);
  r.read("gradient_tolerance", t.gradient_tolerance);
  r.read("mse_goal", t.mse_goal);
  r.read("validation_fraction", t.validation_fraction);
  r.read("scg_sigma", t.scg_sigma);
  r.read("scg_lambda", t.scg_lambda);
  r.finish();
}

void read_paths(const json& j, RunConfig::Paths& p) {
  ObjectReader r(j, "paths");
  auto path = [&](const char* key, std::filesystem::path& target) {
    std::string s = target.string();
    r.read(key, s);
    target = s;
  };
  path("signal_dir", p.signal_dir);
  path("features", p.features);
  path("dataset", p.dataset);
  path("model", p.model);
  path("report", p.report);
  path("out", p.out);
  r.finish();
}

}  // namespace

void RunConfig::validate() const {
  simulation.validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("invalid config: " + what);
  };
  require(level >= 0 && level <= 6, "level must be in [0, 6]");
  require(!levels.empty(), "levels must not be empty");
  for (int l : levels) require(l >= 0 && l <= 6, "levels entries must be in [0, 6]");
  require(!heights_mm.empty(), "heights_mm must not be empty");
  for (double h : heights_mm) {
    require(h >= 1e-4 * (1 - 1e-12) && h <= 1.0 * (1 + 1e-12),
            "heights_mm entries must lie in [1e-4, 1]");
  }
  require(segmentation.segments_per_channel > 0, "segments_per_channel must be positive");
  require(!segmentation.segment_len_override || *segmentation.segment_len_override >= 8,
          "segment_len_override must be at least 8");
  require(training.validation_fraction >= 0.0 && training.validation_fraction < 1.0,
          "training.validation_fraction must be in [0, 1)");
  require(training.scg_sigma > 0.0 && training.scg_lambda > 0.0,
          "training.scg_sigma and training.scg_lambda must be positive");
  require(training.gradient_tolerance >= 0.0 && training.mse_goal >= 0.0,
          "training tolerances must be non-negative");
}

RunConfig parse_run_config(std::string_view json_text, const std::string& source_name) {
  RunConfig cfg;
  try {
    const json j = json::parse(json_text);
    ObjectReader r(j, "config");
    r.read("seed", cfg.seed);
    r.read("level", cfg.level);
    r.read("levels", cfg.levels);
    r.read("heights_mm", cfg.heights_mm);
    r.read("augmentation_enabled", cfg.augmentation_enabled);
    if (const json* s = r.child("simulation")) read_simulation(*s, cfg.simulation);
    if (const json* s = r.child("segmentation")) {
      ObjectReader sr(*s, "segmentation");
      sr.read("segments_per_channel", cfg.segmentation.segments_per_channel);
      if (const json* o = sr.child("segment_len_override")) {
        if (o->is_null()) {
          cfg.segmentation.segment_len_override.reset();
        } else if (o->is_number_unsigned()) {
          cfg.segmentation.segment_len_override = o->get<std::size_t>();
        } else {
          throw std::invalid_argument("segmentation.segment_len_override must be null or a positive integer");
        }
      }
      sr.finish();
    }
    if (const json* t = r.child("training")) read_training(*t, cfg.training);
    if (const json* p = r.child("paths")) read_paths(*p, cfg.paths);
    r.finish();
    cfg.validate();
  } catch (const json::parse_error& e) {
    throw FormatError(source_name, 0, std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(source_name, 0, e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string run_config_json(const RunConfig& c) {
  json modes = json::array();
  for (const auto& m : c.simulation.ringing_modes) {
    modes.push_back({{"frequency_hz", m.frequency_hz},
                     {"damping_ratio", m.damping_ratio},
                     {"opposite_wheel_gain", m.opposite_wheel_gain},
                     {"other_wheelset_gain", m.other_wheelset_gain}});
  }
  const auto& s = c.simulation;
  json j = {
      {"seed", c.seed},
      {"level", c.level},
      {"levels", c.levels},
      {"heights_mm", c.heights_mm},
      {"augmentation_enabled", c.augmentation_enabled},
      {"simulation",
       {{"wheel_radius_m", s.wheel_radius_m},
        {"speed_m_per_s", s.speed_m_per_s},
        {"sample_rate_hz", s.sample_rate_hz},
        {"duration_s", s.duration_s},
        {"ringing_modes", modes},
        {"upper_anchor_height_m", s.upper_anchor_height_m},
        {"upper_anchor_peak_g", s.upper_anchor_peak_g},
        {"lower_anchor_height_m", s.lower_anchor_height_m},
        {"lower_anchor_peak_g", s.lower_anchor_peak_g},
        {"opposite_wheel_factor", s.opposite_wheel_factor},
        {"other_wheelset_factor", s.other_wheelset_factor},
        {"other_wheelset_delay_rev", s.other_wheelset_delay_rev},
        {"impact_phase_rev", s.impact_phase_rev},
        {"noise_fraction", s.noise_fraction},
        {"revolution_gain_jitter", s.revolution_gain_jitter}}},
      {"segmentation",
       {{"segments_per_channel", c.segmentation.segments_per_channel},
        {"segment_len_override", c.segmentation.segment_len_override
                                     ? json(*c.segmentation.segment_len_override)
                                     : json(nullptr)}}},
      {"training",
       {{"max_iterations", c.training.max_iterations},
        {"gradient_tolerance", c.training.gradient_tolerance},
        {"mse_goal", c.training.mse_goal},
        {"validation_fraction", c.training.validation_fraction},
        {"scg_sigma", c.training.scg_sigma},
        {"scg_lambda", c.training.scg_lambda}}},
      {"paths",
       {{"signal_dir", c.paths.signal_dir.string()},
        {"features", c.paths.features.string()},
        {"dataset", c.paths.dataset.string()},
        {"model", c.paths.model.string()},
        {"report", c.paths.report.string()},
        {"out", c.paths.out.string()}}},
  };
  return j.dump();
}

std::uint64_t record_seed(const RunConfig& config, std::size_t height_index,
                          std::size_t channel) {
  return derive_seed(config.seed, 1000 + 10 * height_index + channel);
}

std::uint64_t training_seed(const RunConfig& config, int level) {
  return derive_seed(config.seed, 2000 + static_cast<std::uint64_t>(level));
}

}  // namespace wheelflat
