#ifndef FHARTREE_GRID_HPP
#define FHARTREE_GRID_HPP

#include <cmath>
#include <cstddef>

#include "fhartree/common.hpp"

namespace fhartree {

/// Uniform radial grid on (0, r_max] with nodes r_j = j*h, j = 1..n.
/// The conjugate frequency grid has nodes rho_k = k*pi/r_max, k = 1..n,
/// so that sin(rho_k * r_j) = sin(pi*k*j/n) and the sine-transform pair
/// between the two sides is orthogonal. Neither grid samples the origin,
/// which keeps 1/r and negative-power frequency multipliers finite.
struct RadialGrid {
  std::size_t n_points = 0;
  double r_max = 0.0;

  RadialGrid() = default;
  RadialGrid(std::size_t n, double rmax) : n_points(n), r_max(rmax) {
    FH_REQUIRE(n >= 256 && (n & (n - 1)) == 0,
               "RadialGrid: n_points must be a power of two >= 256");
    FH_REQUIRE(rmax > 0.0 && std::isfinite(rmax),
               "RadialGrid: r_max must be positive and finite");
  }

  double spacing() const { return r_max / static_cast<double>(n_points); }
  double freq_spacing() const { return pi / r_max; }
  double freq_max() const { return static_cast<double>(n_points) * pi / r_max; }
  double freq_min() const { return pi / r_max; }

  /// Physical node r_j, 1-based.
  double radius(std::size_t j) const { return static_cast<double>(j) * spacing(); }
  /// Frequency node rho_k, 1-based.
  double freq(std::size_t k) const { return static_cast<double>(k) * freq_spacing(); }

  bool operator==(const RadialGrid& o) const {
    return n_points == o.n_points && r_max == o.r_max;
  }
  bool operator!=(const RadialGrid& o) const { return !(*this == o); }
};

/// A dyadic frequency scale lambda = 2^exponent.
struct DyadicIndex {
  int exponent = 0;

  DyadicIndex() = default;
  explicit DyadicIndex(int e) : exponent(e) {}

  double value() const { return std::ldexp(1.0, exponent); }

  /// Nearest dyadic at or below x.
  static DyadicIndex floor_of(double x) {
    FH_REQUIRE(x > 0.0, "DyadicIndex: scale must be positive");
    return DyadicIndex(static_cast<int>(std::floor(std::log2(x))));
  }

  bool operator==(const DyadicIndex& o) const { return exponent == o.exponent; }
};

/// Dyadic scales resolvable on the grid: [2*rho_min, rho_max/4]. Outside this
/// window an annulus (lambda/2, 2*lambda) is either unsampled or aliased.
struct DyadicRange {
  int min_exponent;
  int max_exponent;
  bool contains(DyadicIndex k) const {
    return k.exponent >= min_exponent && k.exponent <= max_exponent;
  }
};

inline DyadicRange resolvable_dyadic_range(const RadialGrid& g) {
  const int lo = static_cast<int>(std::ceil(std::log2(2.0 * g.freq_min())));
  const int hi = static_cast<int>(std::floor(std::log2(g.freq_max() / 4.0)));
  return DyadicRange{lo, hi};
}

}  // namespace fhartree

#endif
