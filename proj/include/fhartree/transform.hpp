#ifndef FHARTREE_TRANSFORM_HPP
#define FHARTREE_TRANSFORM_HPP

#include "fhartree/field.hpp"

namespace fhartree {

// Fourier convention:  \hat f(xi) = \int_{R^3} e^{-i x.xi} f(x) dx,
// inverse carries (2 pi)^{-3}. For radial f the 3D transform reduces to
//
//   \hat f(rho) = (4 pi / rho) \int_0^inf sin(rho r) [r f(r)] dr,
//   f(r)  = (1 / (2 pi^2 r)) \int_0^inf sin(rho r) [rho \hat f(rho)] drho,
//
// and on the grid (r_j = j h, rho_k = k pi / r_max) both integrals are
// type-I discrete sine transforms, which makes the discrete pair exactly
// orthogonal: inverse(forward(f)) reproduces f at nodes j = 1..n-1 to
// rounding. The top node (j = n resp. k = n) is annihilated by the sine
// kernel (sin(pi k) = 0) and is written as zero by both directions.

SpectralField forward_transform(const RadialField& f);
RadialField inverse_transform(const SpectralField& F);

namespace detail {
/// S_k = sum_{j=1}^{m} x_j sin(pi j k / (m+1)), k = 1..m, both arrays length m.
/// Unnormalized DST-I; applying it twice multiplies by (m+1)/2.
void dst1(const double* in, double* out, std::size_t m);

/// Evaluate the band-limited interpolant of a spectral field at radius r > 0.
/// Direct sine sum, O(n) per point.
cplx evaluate_radial(const SpectralField& F, double r);
}  // namespace detail

}  // namespace fhartree

#endif
