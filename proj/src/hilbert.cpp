#include "wheelflat/hilbert.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

namespace wheelflat {
namespace {

// The FFTW planner is not re-entrant; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  fftw_plan handle = nullptr;
  ~Plan() {
    if (handle) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(handle);
    }
  }
};

void validate(std::span<const double> segment) {
  if (segment.size() < kMinHilbertLength) {
    throw std::invalid_argument("segment of length " +
                                std::to_string(segment.size()) +
                                " too short for the Hilbert transform");
  }
  for (double v : segment) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("segment contains non-finite samples");
    }
  }
}

}  // namespace

std::vector<std::complex<double>> analytic_signal(std::span<const double> segment) {
  validate(segment);
  const int n = static_cast<int>(segment.size());
  std::vector<std::complex<double>> buf(segment.begin(), segment.end());
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());

  Plan forward, inverse;
  {
    std::lock_guard lock(planner_mutex());
    forward.handle = fftw_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse.handle = fftw_plan_dft_1d(n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(forward.handle);

  // Bins 1 .. ceil(n/2)-1 are positive frequencies; for even n, bin n/2 is
  // Nyquist and is shared by both halves.
  const int half = n / 2;
  const int positive_end = (n % 2 == 0) ? half : half + 1;
  for (int k = 1; k < positive_end; ++k) buf[k] *= 2.0;
  for (int k = half + 1; k < n; ++k) buf[k] = 0.0;

  fftw_execute(inverse.handle);
  const double inv_n = 1.0 / n;
  for (auto& z : buf) z *= inv_n;
  return buf;
}

std::vector<double> analytic_amplitude(std::span<const double> segment) {
  const auto z = analytic_signal(segment);
  std::vector<double> amplitude(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) amplitude[i] = std::abs(z[i]);
  return amplitude;
}

}  // namespace wheelflat
