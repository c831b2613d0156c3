#ifndef FHARTREE_MULTIPLIERS_HPP
#define FHARTREE_MULTIPLIERS_HPP

#include "fhartree/field.hpp"

namespace fhartree {

/// Equation parameters: dispersion exponent alpha, coupling sigma.
/// The spatial dimension is fixed to 3 throughout.
struct ModelParams {
  double alpha = 1.5;
  double sigma = 1.0;

  /// Dynamics requires 1 < alpha <= 2; the estimate routines also accept
  /// alpha = 1 and validate on their own.
  void require_dynamics_range() const {
    FH_REQUIRE(alpha > 1.0 && alpha <= 2.0,
               "ModelParams: dynamics requires 1 < alpha <= 2");
    FH_REQUIRE(std::isfinite(sigma), "ModelParams: sigma must be finite");
  }
};

/// (-Delta)^beta as the multiplier rho^{2 beta}. Nodes start at k = 1, so
/// negative beta never evaluates the symbol at rho = 0.
SpectralField apply_fractional_laplacian_power(const SpectralField& F, double beta);

/// Riesz composition constant c(3, alpha) with
/// F[|x|^{-alpha}](xi) = c(3, alpha) |xi|^{alpha - 3}, 0 < alpha < 3.
double riesz_constant(double alpha);

/// |x|^{-alpha} * density, via the Fourier multiplier c(3,alpha) rho^{alpha-3}.
RadialField riesz_convolution(const RadialField& density, double alpha);
inline RadialField riesz_convolution(const RadialField& density, const ModelParams& p) {
  return riesz_convolution(density, p.alpha);
}

}  // namespace fhartree

#endif
