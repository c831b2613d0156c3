#ifndef FHARTREE_ILLPOSEDNESS_HPP
#define FHARTREE_ILLPOSEDNESS_HPP

#include <cstdint>
#include <vector>

#include "fhartree/dynamics.hpp"
#include "fhartree/field.hpp"

namespace fhartree {

// Norm-growth counterexample: for the annulus datum \hat phi = 1_{[lambda, 2 lambda]}
// the first Picard cubic term
//
//   Phi(t) = int_0^t S(t-t') ( |.|^{-alpha} * |S(t') phi|^2  S(t') phi ) dt'
//
// satisfies ||phi||_{H^s} ~ lambda^{s+3/2} and ||Phi(T)||_{H^s} >~ eps lambda^{s+9/2}
// at T = eps lambda^{-alpha}, so the cubic bound ||Phi|| <~ ||phi||^3 forces
// lambda^{-2s} <~ 1 and fails for s < 0 as lambda grows.

/// Sharp spectral indicator of the annulus lambda <= |xi| <= 2 lambda.
struct AnnulusDatum {
  double lambda = 0.0;
  SpectralField spectral;
  RadialField field;
};

/// Requires 2 lambda < rho_max / 2 (aliasing guard for the cubic products).
AnnulusDatum build_annulus(double lambda, const RadialGrid& grid);

/// Phi(t) via the Duhamel quadrature on a free-flow mesh fine enough that
/// lambda^alpha dt <= 0.05. Warns (and proceeds) outside the regime
/// t <= 0.1 lambda^{-alpha}.
RadialField first_picard_term(const AnnulusDatum& datum, double t,
                              const ModelParams& params);

struct GrowthRow {
  double lambda = 0.0;
  double t_final = 0.0;        // T = eps lambda^{-alpha}
  double norm_phi = 0.0;       // ||phi||_{H^s}
  double norm_big_phi = 0.0;   // ||Phi(T)||_{H^s}
  double ratio = 0.0;          // ||Phi|| / ||phi||^3
};

struct GrowthRecord {
  double s = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
  std::vector<GrowthRow> rows;     // lambda ascending
  double slope_phi = 0.0;          // fitted vs log lambda; expect s + 3/2
  double slope_big_phi = 0.0;      // expect s + 9/2
  double slope_ratio = 0.0;        // expect -2 s
};

GrowthRecord growth_experiment(const std::vector<double>& lambdas, double s,
                               const ModelParams& params, double eps,
                               const RadialGrid& grid);

/// Max of |g_alpha(xi, eta, sigma)| over sampled (eta, sigma, xi - eta - sigma,
/// xi) all in the annulus, with g_alpha = |xi|^a - |eta|^a + |sigma|^a -
/// |xi-eta-sigma|^a. Used by the phase-smallness invariant |t g| < 10 eps.
double max_phase_sample(double lambda, double alpha, std::size_t samples,
                        std::uint64_t seed);

}  // namespace fhartree

#endif
