#pragma once

// Wavelet packet decomposition on a balanced binary tree.
//
// Each split convolves the node with the lowpass/highpass pair over the full
// zero-extended support and keeps the odd-indexed outputs, so a node of
// length n yields two children of length floor((n + 3) / 2). With an
// orthonormal pair this keeps every non-zero output of the paraunitary
// analysis bank: leaf energies sum to the input energy exactly (up to
// rounding). 378 samples reach length 8 after six splits.
//
// Children are stored in natural (Paley) order: node n at level j has
// children 2n (lowpass) and 2n + 1 (highpass) at level j + 1.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace wheelflat {

inline constexpr int kMaxWpdLevel = 6;

/// Two-channel orthogonal filter pair.
struct QmfPair {
  std::array<double, 4> lowpass{};
  std::array<double, 4> highpass{};

  /// Daubechies length-4 (db2 / D4) scaling filter and its quadrature mirror
  /// h[k] = (-1)^k g[3 - k].
  static QmfPair daubechies4();
};

struct Subbands {
  std::vector<double> approx;
  std::vector<double> detail;
};

constexpr std::size_t child_length(std::size_t parent_length) {
  return (parent_length + 3) / 2;
}

/// Length of every subspace at `level` for an input of `input_length`.
constexpr std::size_t subspace_length(std::size_t input_length, int level) {
  std::size_t n = input_length;
  for (int i = 0; i < level; ++i) n = child_length(n);
  return n;
}

/// One analysis split. Throws std::invalid_argument if parent has fewer than
/// two samples.
Subbands decompose_step(std::span<const double> parent, const QmfPair& filters);

struct WpdTree {
  int level = 0;
  std::size_t input_length = 0;
  /// 2^level leaf coefficient series in natural order.
  std::vector<std::vector<double>> subspaces;
};

/// Full tree down to `level` (0..kMaxWpdLevel). Level 0 returns the input as
/// the single subspace. Throws std::invalid_argument for a level out of range
/// or an input shorter than 2^level.
WpdTree decompose(std::span<const double> input, int level,
                  const QmfPair& filters = QmfPair::daubechies4());

/// Leaf coefficients, one row per subspace.
void write_leaves_csv(const WpdTree& tree, std::ostream& out);

}  // namespace wheelflat
