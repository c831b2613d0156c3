#ifndef FHARTREE_DYNAMICS_HPP
#define FHARTREE_DYNAMICS_HPP

#include <optional>
#include <vector>

#include "fhartree/field.hpp"
#include "fhartree/multipliers.hpp"

namespace fhartree {

// Time-dependent machinery for
//
//   -i d_t u + (-Delta)^{alpha/2} u = sigma (|.|^{-alpha} * |u|^2) u,
//
// i.e. d_t u = -i (-Delta)^{alpha/2} u + i sigma V[u] u with the real
// potential V[u] = |.|^{-alpha} * |u|^2. The free group S(t) has symbol
// e^{-i t rho^alpha}; Duhamel reads u = S(t) phi + i sigma J(u, u, u).

/// A solution sampled on a strictly increasing time mesh, all states on one
/// grid. Mass and energy are recorded at every stored time.
struct Trajectory {
  std::vector<double> times;
  std::vector<RadialField> states;
  ModelParams params;
  double dt = 0.0;  // integration step used to produce the states
  std::vector<double> mass;
  std::vector<double> energy;

  std::size_t size() const { return times.size(); }
  /// Index of the mesh point equal to t (tolerance 1e-9 relative).
  std::size_t index_of(double t) const;
};

/// Pullbacks S(-t_i) u(t_i) at the probe times with all pairwise L2 distances.
struct ScatterRecord {
  std::vector<double> probe_times;
  std::vector<RadialField> pullbacks;
  std::vector<std::vector<double>> distances;  // symmetric, zero diagonal
};

struct PicardResult {
  std::vector<Trajectory> iterates;  // u^0 and the last iterate; all if requested
  std::vector<double> diffs;         // d_k = sup_t ||u^{k+1} - u^k||_{L2}
  bool converged = false;            // d_k fell below the rounding floor
  bool diverged = false;             // d_k increased twice in a row
  const Trajectory& first() const { return iterates.front(); }
  const Trajectory& last() const { return iterates.back(); }
};

struct LocalTimeProbe {
  double t_star = 0.0;
  bool found = false;        // some T in the bracket passed
  bool bracket_maximal = false;
  double contraction_threshold = 0.5;
  double ball_radius = 0.0;  // high-frequency budget epsilon(r)
};

RadialField free_propagate(const RadialField& f, double t, const ModelParams& p);
SpectralField free_propagate(const SpectralField& F, double t, const ModelParams& p);

/// S(t) phi sampled on the uniform mesh {m T / n_steps}.
Trajectory free_trajectory(const RadialField& phi, double T, const ModelParams& p,
                           std::size_t n_steps);

/// E(u) = 1/2 <(-Delta)^{alpha/2} u, u> + (sigma/4) <(|.|^{-alpha} * |u|^2) u, u>.
double energy(const RadialField& f, const ModelParams& p);

/// Strang splitting: half nonlinear phase rotation, full free step, half
/// rotation. Both substeps conserve the discrete mass exactly. `record_stride`
/// controls how many integration steps separate stored states. Throws
/// numerical_failure if the L2 norm grows beyond 1e3 times its initial value.
Trajectory evolve(const RadialField& phi, double T, const ModelParams& p, double dt,
                  std::size_t record_stride = 1);

/// lambda^{3/2} f(lambda r) by band-limited (sine-sum) resampling.
/// Throws when the rescaled function cannot be represented on the grid
/// (physical support for lambda < 1, spectral support for lambda > 1).
RadialField rescale(const RadialField& f, double lam, const ModelParams& p);
Trajectory rescale_trajectory(const Trajectory& traj, double lam);

/// J(u1,u2,u3)(t) = int_0^t S(t-t') [ (|.|^{-alpha} * (u1 conj(u2))) u3 ](t') dt'
/// by the trapezoid rule on the trajectories' shared mesh.
RadialField duhamel_J(const Trajectory& u1, const Trajectory& u2, const Trajectory& u3,
                      double t, const ModelParams& p);

/// J evaluated at every mesh point of the inputs (single sweep).
Trajectory duhamel_sweep(const Trajectory& u1, const Trajectory& u2,
                         const Trajectory& u3, const ModelParams& p);

/// u^0 = S(t) phi, u^{k+1} = S(t) phi + i sigma J(u^k, u^k, u^k).
PicardResult picard_iterate(const RadialField& phi, double T, const ModelParams& p,
                            std::size_t k_max, std::size_t n_mesh,
                            bool keep_iterates = false);

ScatterRecord scattering_extract(const Trajectory& traj,
                                 const std::vector<double>& probe_times);

struct LocalTimeOptions {
  double eta = std::ldexp(1.0, -10);  // high-tail budget in the datum
  double contraction_threshold = 0.5;
  double bracket_lo = 1e-6;
  double bracket_hi = 8.0;
  std::size_t bisections = 12;
  std::size_t k_max = 6;
};

/// Datum in B_{r,Lambda}: low-frequency bulk of mass r plus a small tail of
/// mass eta/(2r) above Lambda.
RadialField local_time_datum(double r, DyadicIndex Lambda, const RadialGrid& grid,
                             double eta);

/// Largest T in the bracket for which the Picard iteration from a B_{r,Lambda}
/// datum both contracts (ratio < threshold) and keeps its high-frequency part
/// inside the epsilon-ball of radius 2^{-6}/r.
LocalTimeProbe local_time_probe(double r, DyadicIndex Lambda, const ModelParams& p,
                                const RadialGrid& grid,
                                const LocalTimeOptions& opts = {});

}  // namespace fhartree

#endif
