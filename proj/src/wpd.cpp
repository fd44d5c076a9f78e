#include "wheelflat/wpd.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "wheelflat/csv.hpp"

namespace wheelflat {

QmfPair QmfPair::daubechies4() {
  const double s3 = std::sqrt(3.0);
  const double d = 4.0 * std::sqrt(2.0);
  QmfPair q;
  q.lowpass = {(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d};
  for (std::size_t k = 0; k < 4; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    q.highpass[k] = sign * q.lowpass[3 - k];
  }
  return q;
}

Subbands decompose_step(std::span<const double> parent, const QmfPair& filters) {
  const std::size_t n = parent.size();
  if (n < 2) {
    throw std::invalid_argument("WPD node of length " + std::to_string(n) +
                                " cannot be split");
  }
  const std::size_t m = child_length(n);
  Subbands out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  // y[t] = sum_k f[k] x[t - k] over the full support t = 0 .. n + 2; keep
  // t = 2i + 1.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t t = 2 * i + 1;
    double a = 0.0, d = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (k > t || t - k >= n) continue;
      const double x = parent[t - k];
      a += filters.lowpass[k] * x;
      d += filters.highpass[k] * x;
    }
    out.approx[i] = a;
    out.detail[i] = d;
  }
  return out;
}

WpdTree decompose(std::span<const double> input, int level,
                  const QmfPair& filters) {
  if (level < 0 || level > kMaxWpdLevel) {
    throw std::invalid_argument("WPD level " + std::to_string(level) +
                                " outside [0, " + std::to_string(kMaxWpdLevel) +
                                "]");
  }
  if (input.empty() || input.size() < (std::size_t{1} << level)) {
    throw std::invalid_argument("input of length " + std::to_string(input.size()) +
                                " too short for a level-" + std::to_string(level) +
                                " decomposition");
  }
  WpdTree tree;
  tree.level = level;
  tree.input_length = input.size();
  tree.subspaces.emplace_back(input.begin(), input.end());
  for (int j = 0; j < level; ++j) {
    std::vector<std::vector<double>> next;
    next.reserve(tree.subspaces.size() * 2);
    for (const auto& node : tree.subspaces) {
      auto [approx, detail] = decompose_step(node, filters);
      next.push_back(std::move(approx));
      next.push_back(std::move(detail));
    }
    tree.subspaces = std::move(next);
  }
  return tree;
}

void write_leaves_csv(const WpdTree& tree, std::ostream& out) {
  const std::size_t width = tree.subspaces.empty() ? 0 : tree.subspaces.front().size();
  out << "subspace";
  for (std::size_t k = 0; k < width; ++k) out << ",d" << k;
  out << '\n';
  for (std::size_t n = 0; n < tree.subspaces.size(); ++n) {
    out << n;
    for (double v : tree.subspaces[n]) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

}  // namespace wheelflat
