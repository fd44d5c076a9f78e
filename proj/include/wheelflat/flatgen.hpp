#pragma once

// Wheel-flat geometry and a surrogate generator for four-channel axle-box
// acceleration (ABA) records.
//
// The surrogate replaces a multibody simulation with an impulse train: once
// per wheel revolution the flat strikes the rail and excites a set of damped
// wheelset modes. Each axle box sees that excitation through its own transfer
// path:
//
//   direct          the defect wheel; all modes, peak = calibrated peak
//   opposite wheel  same wheelset; per-mode transmissibility, peak x 0.7
//   other wheelset  per-mode transmissibility, peak x 0.25, delayed by a
//                   third of a revolution
//
// Every path carries its own per-revolution gain jitter and white noise.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wheelflat/wheel_position.hpp"

namespace wheelflat {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2 per g

struct FlatGeometry {
  double angle_rad = 0.0;      // half-angle subtended by the flat
  double skid_length_m = 0.0;  // chord length of the flat
};

/// Closed-form flat geometry: h = r (1 - cos θ), l = 2 r sin θ.
/// Throws std::domain_error unless 0 <= height_m < wheel_radius_m.
FlatGeometry flat_geometry(double height_m, double wheel_radius_m);

struct WheelFlat {
  double height_m = 0.0;
  double angle_rad = 0.0;
  double skid_length_m = 0.0;
  WheelPosition location;
};

WheelFlat make_flat(double height_m, WheelPosition location,
                    double wheel_radius_m);

/// Flat heights 1e-4 ... 1e-0 mm, in metres, ascending.
std::array<double, 5> height_ladder();

/// One damped ringing mode excited by each impact. The gains scale the mode
/// along the non-direct transfer paths before channel normalisation.
struct RingingMode {
  double frequency_hz = 0.0;
  double damping_ratio = 0.02;
  double opposite_wheel_gain = 1.0;
  double other_wheelset_gain = 1.0;
};

/// Wheelset modes 7-14 (modes 12 and 13 share 445.490 Hz) at 2 % damping.
std::vector<RingingMode> default_ringing_modes();

struct SimConfig {
  double wheel_radius_m = 0.5;
  double speed_m_per_s = 16.667;
  double sample_rate_hz = 2000.0;
  double duration_s = 5.0;
  std::vector<RingingMode> ringing_modes = default_ringing_modes();
  std::uint64_t rng_seed = 1;

  // Peak-vs-height calibration, log-linear through two anchors.
  double upper_anchor_height_m = 1.0e-3;
  double upper_anchor_peak_g = 100.0;
  double lower_anchor_height_m = 1.0e-4;
  double lower_anchor_peak_g = 10.0;

  double opposite_wheel_factor = 0.7;
  double other_wheelset_factor = 0.25;
  double other_wheelset_delay_rev = 1.0 / 3.0;
  /// Angular position of the flat at t = 0, as a fraction of a revolution.
  double impact_phase_rev = 0.5;
  /// Noise standard deviation relative to the defect-channel peak.
  double noise_fraction = 0.01;
  /// Log-standard-deviation of the per-revolution, per-path impact gain.
  double revolution_gain_jitter = 0.3;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

/// Time for one wheel revolution, 2πr / v.
double revolution_period_s(const SimConfig& config);

std::size_t sample_count(const SimConfig& config);

/// Impacts generated per record: floor(duration / period).
std::size_t impact_count(const SimConfig& config);

/// Calibrated defect-channel peak in m/s^2; zero for a zero-height flat.
double impact_peak(double height_m, const SimConfig& config);

/// Four ABA channels in kChannelOrder (FL, FR, RL, RR), m/s^2.
struct AbaRecord {
  std::array<std::vector<double>, kChannelCount> channels;
  double sample_rate_hz = 0.0;
  WheelFlat flat;
  SimConfig config;

  std::size_t size() const { return channels[0].size(); }
};

/// Deterministic in (flat, config); the random streams depend only on
/// config.rng_seed and the transfer path, so relabelling the defect wheel
/// permutes the channels exactly.
AbaRecord synthesize(const WheelFlat& flat, const SimConfig& config);

/// Header `t,fl,fr,rl,rr`, one row per sample.
void write_aba_csv(const AbaRecord& record, std::ostream& out);

/// Reads channels and sample rate back from CSV. Flat metadata and config are
/// not stored in the file and must be filled in by the caller.
AbaRecord read_aba_csv(std::istream& in, const std::string& source_name);

}  // namespace wheelflat
