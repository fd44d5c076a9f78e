#pragma once

#include <complex>
#include <span>
#include <vector>

namespace wheelflat {

inline constexpr std::size_t kMinHilbertLength = 8;

/// Discrete analytic signal of a finite real segment: the spectrum keeps DC
/// (and Nyquist, for even lengths), doubles positive frequencies and zeroes
/// negative ones. The real part reproduces the input; the imaginary part is
/// the circular Hilbert transform.
///
/// Throws std::invalid_argument for segments shorter than kMinHilbertLength
/// or containing non-finite samples.
std::vector<std::complex<double>> analytic_signal(std::span<const double> segment);

/// Envelope |x + jH[x]| of the segment, same length as the input.
std::vector<double> analytic_amplitude(std::span<const double> segment);

}  // namespace wheelflat
