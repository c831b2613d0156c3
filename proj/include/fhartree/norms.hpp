#ifndef FHARTREE_NORMS_HPP
#define FHARTREE_NORMS_HPP

#include "fhartree/field.hpp"

namespace fhartree {

// Discrete norms on the radial measure 4 pi r^2 dr (physical side) and
// rho^2 drho / (2 pi^2) (spectral side), both by the trapezoid rule on
// [0, r_max] resp. [0, rho_max] with the implicit zero node at the origin.
// The spectral weight 1/(2 pi^2) = 4 pi / (2 pi)^3 is the Plancherel
// constant of the fixed Fourier convention.

double l2_norm(const RadialField& f);
double l2_norm(const SpectralField& F);

/// L^p norm (4 pi \int |f|^p r^2 dr)^{1/p}, p >= 1.
double lp_norm(const RadialField& f, double p);

/// ||f||_{H^s} via the spectral weight (1 + rho^2)^{s/2}.
double sobolev_norm(const RadialField& f, double s);
double sobolev_norm(const SpectralField& F, double s);

/// Complex inner product <u, v> = 4 pi \int u(r) conj(v(r)) r^2 dr.
cplx inner_product(const RadialField& u, const RadialField& v);

/// ||a - b||_{L^2} without materializing the difference.
double l2_distance(const RadialField& a, const RadialField& b);
double l2_distance(const SpectralField& a, const SpectralField& b);

}  // namespace fhartree

#endif
