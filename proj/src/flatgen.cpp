#include "wheelflat/flatgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "wheelflat/csv.hpp"
#include "wheelflat/seed.hpp"

namespace wheelflat {

FlatGeometry flat_geometry(double height_m, double wheel_radius_m) {
  if (!(wheel_radius_m > 0.0) || !std::isfinite(wheel_radius_m)) {
    throw std::domain_error("wheel radius must be positive");
  }
  if (!(height_m >= 0.0) || !(height_m < wheel_radius_m)) {
    throw std::domain_error("flat height " + std::to_string(height_m) +
                            " m outside [0, wheel radius)");
  }
  FlatGeometry g;
  g.angle_rad = std::acos(1.0 - height_m / wheel_radius_m);
  g.skid_length_m = 2.0 * wheel_radius_m * std::sin(g.angle_rad);
  return g;
}

WheelFlat make_flat(double height_m, WheelPosition location,
                    double wheel_radius_m) {
  channel_index(location);  // rejects rear-bogie positions
  const auto g = flat_geometry(height_m, wheel_radius_m);
  return {height_m, g.angle_rad, g.skid_length_m, location};
}

std::array<double, 5> height_ladder() {
  return {1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
}

std::vector<RingingMode> default_ringing_modes() {
  // Axle modes pass to every box; wheel-local modes (umbrella, wheel
  // bending) stay on the struck wheel; the bogie frame passes only the low
  // axle modes to the other wheelset.
  return {
      {55.626, 0.02, 1.0, 1.0},   // axle torsion
      {76.292, 0.02, 1.0, 1.0},   // axle bending 1
      {136.996, 0.02, 1.0, 1.0},  // axle bending 2
      {279.376, 0.02, 0.1, 0.1},  // wheel umbrella 1
      {365.859, 0.02, 1.0, 0.1},  // wheel + axle bending 1
      {445.490, 0.02, 0.1, 0.1},  // wheel bending / umbrella 2
      {731.255, 0.02, 1.0, 0.1},  // wheel + axle bending 2
  };
}

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid SimConfig: ") + what);
  };
  require(wheel_radius_m > 0.0 && std::isfinite(wheel_radius_m),
          "wheel_radius_m must be positive");
  require(speed_m_per_s > 0.0 && std::isfinite(speed_m_per_s),
          "speed_m_per_s must be positive");
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz),
          "sample_rate_hz must be positive");
  require(duration_s > 0.0 && std::isfinite(duration_s),
          "duration_s must be positive");
  require(!ringing_modes.empty(), "ringing_modes must not be empty");
  for (const auto& m : ringing_modes) {
    require(m.frequency_hz > 0.0, "ringing mode frequency must be positive");
    require(m.damping_ratio > 0.0 && m.damping_ratio < 1.0,
            "ringing mode damping ratio must be in (0, 1)");
    require(2.0 * m.frequency_hz <= sample_rate_hz,
            "sample_rate_hz below twice the highest ringing frequency");
    require(m.opposite_wheel_gain >= 0.0 && m.other_wheelset_gain >= 0.0,
            "mode transfer gains must be non-negative");
  }
  require(lower_anchor_height_m > 0.0 &&
              upper_anchor_height_m > lower_anchor_height_m,
          "calibration anchor heights must satisfy 0 < lower < upper");
  require(lower_anchor_peak_g > 0.0 && upper_anchor_peak_g > lower_anchor_peak_g,
          "calibration anchor peaks must satisfy 0 < lower < upper");
  require(opposite_wheel_factor >= 0.0 && other_wheelset_factor >= 0.0,
          "channel factors must be non-negative");
  require(other_wheelset_delay_rev >= 0.0 && other_wheelset_delay_rev < 1.0,
          "other_wheelset_delay_rev must be in [0, 1)");
  require(impact_phase_rev >= 0.0 && impact_phase_rev < 1.0,
          "impact_phase_rev must be in [0, 1)");
  require(noise_fraction >= 0.0, "noise_fraction must be non-negative");
  require(revolution_gain_jitter >= 0.0,
          "revolution_gain_jitter must be non-negative");
}

double revolution_period_s(const SimConfig& config) {
  return 2.0 * std::numbers::pi * config.wheel_radius_m / config.speed_m_per_s;
}

std::size_t sample_count(const SimConfig& config) {
  return static_cast<std::size_t>(
      std::llround(config.duration_s * config.sample_rate_hz));
}

std::size_t impact_count(const SimConfig& config) {
  return static_cast<std::size_t>(
      std::floor(config.duration_s / revolution_period_s(config)));
}

double impact_peak(double height_m, const SimConfig& config) {
  if (height_m <= 0.0) return 0.0;
  const double slope =
      std::log(config.upper_anchor_peak_g / config.lower_anchor_peak_g) /
      std::log(config.upper_anchor_height_m / config.lower_anchor_height_m);
  const double log_peak = std::log(config.upper_anchor_peak_g) +
                          slope * std::log(height_m / config.upper_anchor_height_m);
  return std::exp(log_peak) * kStandardGravity;
}

namespace {

enum class Path { Direct, Opposite, OtherSameSide, OtherOppositeSide };
constexpr std::array<Path, 4> kPaths = {Path::Direct, Path::Opposite,
                                        Path::OtherSameSide,
                                        Path::OtherOppositeSide};

std::size_t path_channel(Path path, const WheelPosition& defect) {
  WheelPosition p = defect;
  auto flip_side = [](Side s) { return s == Side::Left ? Side::Right : Side::Left; };
  auto flip_set = [](Wheelset w) {
    return w == Wheelset::Front ? Wheelset::Rear : Wheelset::Front;
  };
  switch (path) {
    case Path::Direct: break;
    case Path::Opposite: p.side = flip_side(p.side); break;
    case Path::OtherSameSide: p.wheelset = flip_set(p.wheelset); break;
    case Path::OtherOppositeSide:
      p.wheelset = flip_set(p.wheelset);
      p.side = flip_side(p.side);
      break;
  }
  return channel_index(p);
}

bool is_other_wheelset(Path path) {
  return path == Path::OtherSameSide || path == Path::OtherOppositeSide;
}

// Noise-free response of one transfer path to the impulse train.
std::vector<double> ring(const SimConfig& config, Path path,
                         const std::vector<double>& impact_gains) {
  const std::size_t n = sample_count(config);
  const double fs = config.sample_rate_hz;
  const double period = revolution_period_s(config);
  const double delay =
      is_other_wheelset(path) ? config.other_wheelset_delay_rev * period : 0.0;

  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < impact_gains.size(); ++k) {
    const double onset =
        (config.impact_phase_rev + static_cast<double>(k)) * period + delay;
    const auto first = static_cast<std::size_t>(std::ceil(onset * fs));
    if (first >= n) break;
    for (const auto& mode : config.ringing_modes) {
      double weight = 1.0;
      if (path == Path::Opposite) weight = mode.opposite_wheel_gain;
      if (is_other_wheelset(path)) weight = mode.other_wheelset_gain;
      weight *= impact_gains[k];
      if (weight == 0.0) continue;
      const double omega = 2.0 * std::numbers::pi * mode.frequency_hz;
      const double decay = mode.damping_ratio * omega;
      const double omega_d =
          omega * std::sqrt(1.0 - mode.damping_ratio * mode.damping_ratio);
      // Past ~41 time constants the envelope is below 1e-18.
      const double horizon = 41.5 / decay;
      for (std::size_t i = first; i < n; ++i) {
        const double tau = static_cast<double>(i) / fs - onset;
        if (tau > horizon) break;
        x[i] += weight * std::exp(-decay * tau) * std::sin(omega_d * tau);
      }
    }
  }
  return x;
}

}  // namespace

AbaRecord synthesize(const WheelFlat& flat, const SimConfig& config) {
  config.validate();
  const auto geometry = flat_geometry(flat.height_m, config.wheel_radius_m);
  channel_index(flat.location);

  AbaRecord record;
  record.sample_rate_hz = config.sample_rate_hz;
  record.flat = flat;
  record.flat.angle_rad = geometry.angle_rad;
  record.flat.skid_length_m = geometry.skid_length_m;
  record.config = config;

  const std::size_t n = sample_count(config);
  const std::size_t impacts = impact_count(config);
  const double peak = impact_peak(flat.height_m, config);

  for (std::size_t p = 0; p < kPaths.size(); ++p) {
    const Path path = kPaths[p];
    std::mt19937_64 rng(derive_seed(config.rng_seed, p));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> gains(impacts);
    for (auto& g : gains) g = std::exp(config.revolution_gain_jitter * normal(rng));
    std::vector<double> noise(n);
    for (auto& e : noise) e = normal(rng);

    double target = peak;
    if (path == Path::Opposite) target *= config.opposite_wheel_factor;
    if (is_other_wheelset(path)) target *= config.other_wheelset_factor;

    std::vector<double> x = ring(config, path, gains);
    double max_abs = 0.0;
    for (double v : x) max_abs = std::max(max_abs, std::abs(v));
    const double scale = max_abs > 0.0 ? target / max_abs : 0.0;
    const double sigma = config.noise_fraction * peak;
    for (std::size_t i = 0; i < n; ++i) x[i] = scale * x[i] + sigma * noise[i];

    record.channels[path_channel(path, flat.location)] = std::move(x);
  }
  return record;
}

void write_aba_csv(const AbaRecord& record, std::ostream& out) {
  out << "t,fl,fr,rl,rr\n";
  std::array<double, 5> row{};
  for (std::size_t i = 0; i < record.size(); ++i) {
    row[0] = static_cast<double>(i) / record.sample_rate_hz;
    for (std::size_t c = 0; c < kChannelCount; ++c) row[c + 1] = record.channels[c][i];
    csv::write_row(out, row);
  }
}

AbaRecord read_aba_csv(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  const auto header = reader.header();
  const std::vector<std::string> expected = {"t", "fl", "fr", "rl", "rr"};
  if (header != expected) reader.fail("expected header 't,fl,fr,rl,rr'");

  AbaRecord record;
  std::vector<double> times;
  std::vector<std::string_view> cells;
  while (reader.next(cells)) {
    if (cells.size() != 5) {
      reader.fail("expected 5 columns, found " + std::to_string(cells.size()));
    }
    const double t = reader.parse_double(cells[0]);
    if (!times.empty() && !(t > times.back())) reader.fail("time column not increasing");
    times.push_back(t);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      record.channels[c].push_back(reader.parse_double(cells[c + 1]));
    }
  }
  if (times.size() < 2) reader.fail("need at least two samples");
  const double span = times.back() - times.front();
  const double rate = static_cast<double>(times.size() - 1) / span;
  record.sample_rate_hz = std::round(rate * 1e6) / 1e6;
  return record;
}

}  // namespace wheelflat
