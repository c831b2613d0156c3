#ifndef FHARTREE_STEP_ATOM_HPP
#define FHARTREE_STEP_ATOM_HPP

#include <vector>

#include "fhartree/dynamics.hpp"
#include "fhartree/field.hpp"

namespace fhartree {

/// Finite-partition piecewise free evolution
///
///   a(t) = sum_k 1_{[t_{k-1}, t_k)}(t) S(t) phi_k,   k = 1..K,
///
/// zero outside [t_0, t_K). Pieces are stored on the spectral side, so the
/// propagator pullback S(-t) a(t) is the piecewise-constant level sequence
/// 0, phi_1, ..., phi_K, 0.
struct StepAtom {
  std::vector<double> knots;           // t_0 < t_1 < ... < t_K
  std::vector<SpectralField> pieces;   // phi_k, one per interval
  ModelParams params;

  std::size_t piece_count() const { return pieces.size(); }

  void validate() const {
    FH_REQUIRE(knots.size() == pieces.size() + 1 && !pieces.empty(),
               "StepAtom: need K >= 1 pieces and K+1 knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
      FH_REQUIRE(knots[i] > knots[i - 1], "StepAtom: knots must increase strictly");
    for (std::size_t i = 1; i < pieces.size(); ++i)
      FH_REQUIRE(pieces[i].grid == pieces[0].grid, "StepAtom: pieces on one grid");
  }

  /// Spectral value at time t (e^{-i t rho^alpha} phi_k), zero outside support.
  SpectralField evaluate_spectral(double t) const;
  RadialField evaluate(double t) const;
};

/// Exact V^2 norm of a step atom. The pullback is piecewise constant, so the
/// supremum over all partitions is attained on subsets of the jump levels;
/// maximizing the quadratic path sum over subsets is a small dynamic program.
/// Includes the endpoint convention S(-t_K) v(t_K) = 0: every admissible path
/// starts and ends at the zero level.
double v2_norm_exact(const StepAtom& atom);

struct V2LowerResult {
  double value = 0.0;
  bool budget_exhausted = false;
  std::vector<std::size_t> partition;  // mesh indices of the chosen partition
};

/// Certified lower bound for the V^2 norm of a trajectory restricted to its
/// mesh span (treated as zero outside, matching the atom convention): greedy
/// insertion of mesh points, at most `budget` evaluations of candidate gains.
V2LowerResult v2_norm_lower(const Trajectory& traj, std::size_t budget);

/// Atom with every piece frequency-projected by P_lambda.
StepAtom project(const StepAtom& atom, DyadicIndex lambda);

StepAtom add(const StepAtom& a, const StepAtom& b);
StepAtom scale(StepAtom a, cplx c);

}  // namespace fhartree

#endif
