#ifndef FHARTREE_LITTLEWOOD_PALEY_HPP
#define FHARTREE_LITTLEWOOD_PALEY_HPP

#include "fhartree/field.hpp"

namespace fhartree {

/// Smooth dyadic bump family. The base cutoff is the standard transition
///
///   rho(s) = psi(2 - |s|) / (psi(2 - |s|) + psi(|s| - 1)),  psi(t) = e^{-1/t} (t > 0),
///
/// which equals exactly 1.0 for |s| <= 1 and exactly 0.0 for |s| >= 2 in
/// floating point, so plateau identities (P~_lambda P_lambda = P_lambda)
/// hold bit-exactly at sample level. The annulus bump is
/// chi(s) = rho(|s|) - rho(2|s|), supported in (1/2, 2), and
/// sum_{lambda in 2^Z} chi(s / lambda) = 1 for s != 0.
struct BumpFamily {
  /// Base cutoff rho(s).
  static double base_cutoff(double s);
  /// Annulus bump chi(s) = rho(|s|) - rho(2|s|).
  static double annulus(double s);

  /// chi_lambda(rho) = chi(rho / lambda).
  double band(double rho, double lambda) const { return annulus(rho / lambda); }
  /// chi_{<= lambda}(rho) = rho-cutoff(rho / lambda), the telescoped low-pass.
  double low_pass(double rho, double lambda) const { return base_cutoff(rho / lambda); }
  /// 1 - chi_{<= lambda}.
  double high_pass(double rho, double lambda) const { return 1.0 - low_pass(rho, lambda); }
  /// chi~_lambda = chi_{lambda/2} + chi_lambda + chi_{2 lambda}; computed by
  /// the telescoped form rho(s/2) - rho(4 s), equal to 1.0 exactly on the
  /// support of chi_lambda.
  double wide_band(double rho, double lambda) const {
    const double s = rho / lambda;
    return base_cutoff(0.5 * s) - base_cutoff(4.0 * s);
  }
};

BumpFamily build_bump();

SpectralField project(const SpectralField& F, DyadicIndex lambda);
SpectralField project_leq(const SpectralField& F, DyadicIndex lambda);
SpectralField project_gt(const SpectralField& F, DyadicIndex lambda);
SpectralField project_tilde(const SpectralField& F, DyadicIndex lambda);

RadialField project(const RadialField& f, DyadicIndex lambda);
RadialField project_leq(const RadialField& f, DyadicIndex lambda);
RadialField project_gt(const RadialField& f, DyadicIndex lambda);
RadialField project_tilde(const RadialField& f, DyadicIndex lambda);

}  // namespace fhartree

#endif
