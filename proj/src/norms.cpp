#include "fhartree/norms.hpp"

#include <cmath>

#include "fhartree/transform.hpp"

namespace fhartree {

namespace {
// Trapezoid weights on nodes 1..n of [0, x_max]: interior 1, last 1/2.
// The origin node is implicit and its integrand vanishes (r^2 factor).
inline double trapezoid_weight(std::size_t j, std::size_t n) {
  return j == n ? 0.5 : 1.0;
}
}  // namespace

double l2_norm(const RadialField& f) {
  const RadialGrid& g = f.grid;
  double acc = 0.0;
  for (std::size_t j = 1; j <= g.n_points; ++j) {
    const double r = g.radius(j);
    acc += trapezoid_weight(j, g.n_points) * r * r * std::norm(f[j - 1]);
  }
  return std::sqrt(4.0 * pi * g.spacing() * acc);
}

double l2_norm(const SpectralField& F) {
  const RadialGrid& g = F.grid;
  double acc = 0.0;
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double rho = g.freq(k);
    acc += trapezoid_weight(k, g.n_points) * rho * rho * std::norm(F[k - 1]);
  }
  return std::sqrt(g.freq_spacing() / (2.0 * pi * pi) * acc);
}

double lp_norm(const RadialField& f, double p) {
  FH_REQUIRE(p >= 1.0, "lp_norm: p must be >= 1");
  const RadialGrid& g = f.grid;
  double acc = 0.0;
  for (std::size_t j = 1; j <= g.n_points; ++j) {
    const double r = g.radius(j);
    acc += trapezoid_weight(j, g.n_points) * r * r * std::pow(std::abs(f[j - 1]), p);
  }
  return std::pow(4.0 * pi * g.spacing() * acc, 1.0 / p);
}

double sobolev_norm(const SpectralField& F, double s) {
  const RadialGrid& g = F.grid;
  double acc = 0.0;
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double rho = g.freq(k);
    acc += trapezoid_weight(k, g.n_points) * std::pow(1.0 + rho * rho, s) * rho * rho *
           std::norm(F[k - 1]);
  }
  return std::sqrt(g.freq_spacing() / (2.0 * pi * pi) * acc);
}

double sobolev_norm(const RadialField& f, double s) {
  return sobolev_norm(forward_transform(f), s);
}

cplx inner_product(const RadialField& u, const RadialField& v) {
  FH_REQUIRE(u.grid == v.grid, "inner_product: grid mismatch");
  const RadialGrid& g = u.grid;
  cplx acc(0.0, 0.0);
  for (std::size_t j = 1; j <= g.n_points; ++j) {
    const double r = g.radius(j);
    acc += trapezoid_weight(j, g.n_points) * r * r * u[j - 1] * std::conj(v[j - 1]);
  }
  return 4.0 * pi * g.spacing() * acc;
}

double l2_distance(const RadialField& a, const RadialField& b) {
  FH_REQUIRE(a.grid == b.grid, "l2_distance: grid mismatch");
  const RadialGrid& g = a.grid;
  double acc = 0.0;
  for (std::size_t j = 1; j <= g.n_points; ++j) {
    const double r = g.radius(j);
    acc += trapezoid_weight(j, g.n_points) * r * r * std::norm(a[j - 1] - b[j - 1]);
  }
  return std::sqrt(4.0 * pi * g.spacing() * acc);
}

double l2_distance(const SpectralField& a, const SpectralField& b) {
  FH_REQUIRE(a.grid == b.grid, "l2_distance: grid mismatch");
  const RadialGrid& g = a.grid;
  double acc = 0.0;
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double rho = g.freq(k);
    acc += trapezoid_weight(k, g.n_points) * rho * rho * std::norm(a[k - 1] - b[k - 1]);
  }
  return std::sqrt(g.freq_spacing() / (2.0 * pi * pi) * acc);
}

}  // namespace fhartree
