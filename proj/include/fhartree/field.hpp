#ifndef FHARTREE_FIELD_HPP
#define FHARTREE_FIELD_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "fhartree/common.hpp"
#include "fhartree/grid.hpp"

namespace fhartree {

namespace detail {
template <class Tag>
struct FieldBase {
  RadialGrid grid;
  std::vector<cplx> values;  // one sample per node, 1-based node j stored at [j-1]

  FieldBase() = default;
  explicit FieldBase(const RadialGrid& g) : grid(g), values(g.n_points, cplx(0.0, 0.0)) {}
  FieldBase(const RadialGrid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    FH_REQUIRE(values.size() == grid.n_points, "field: sample count must equal n_points");
  }

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const {
    for (const cplx& z : values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }
};
}  // namespace detail

struct physical_tag {};
struct spectral_tag {};

/// Samples f(r_j) of a radial function phi(x) = f(|x|) on R^3.
struct RadialField : detail::FieldBase<physical_tag> {
  using FieldBase::FieldBase;

  static RadialField from_function(const RadialGrid& g,
                                   const std::function<cplx(double)>& f) {
    RadialField out(g);
    for (std::size_t j = 1; j <= g.n_points; ++j) out[j - 1] = f(g.radius(j));
    return out;
  }
  static RadialField from_real(const RadialGrid& g,
                               const std::function<double(double)>& f) {
    RadialField out(g);
    for (std::size_t j = 1; j <= g.n_points; ++j) out[j - 1] = cplx(f(g.radius(j)), 0.0);
    return out;
  }
};

/// Samples \hat f(rho_k) of the 3D Fourier transform, as a function of rho = |xi|.
struct SpectralField : detail::FieldBase<spectral_tag> {
  using FieldBase::FieldBase;

  static SpectralField from_function(const RadialGrid& g,
                                     const std::function<cplx(double)>& f) {
    SpectralField out(g);
    for (std::size_t k = 1; k <= g.n_points; ++k) out[k - 1] = f(g.freq(k));
    return out;
  }
};

// Pointwise linear arithmetic on a shared grid.
template <class F>
F& axpy(F& y, cplx a, const F& x) {
  FH_REQUIRE(y.grid == x.grid, "axpy: grid mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
  return y;
}

template <class F>
F scaled(F f, cplx a) {
  for (auto& z : f.values) z *= a;
  return f;
}

template <class F>
F difference(const F& a, const F& b) {
  FH_REQUIRE(a.grid == b.grid, "difference: grid mismatch");
  F out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline RadialField pointwise_product(const RadialField& a, const RadialField& b) {
  FH_REQUIRE(a.grid == b.grid, "pointwise_product: grid mismatch");
  RadialField out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline RadialField conjugate(RadialField f) {
  for (auto& z : f.values) z = std::conj(z);
  return f;
}

/// |f|^2 as a real-valued radial field (the Hartree density).
inline RadialField squared_modulus(const RadialField& f) {
  RadialField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = cplx(std::norm(f[i]), 0.0);
  return out;
}

}  // namespace fhartree

#endif
