#ifndef FHARTREE_ESTIMATES_HPP
#define FHARTREE_ESTIMATES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fhartree/field.hpp"
#include "fhartree/step_atom.hpp"

namespace fhartree {

// ---------------------------------------------------------------------------
// The bilinear delta integral
//
//   I(phi, psi)(tau, xi) = int phi(|eta|) psi(|xi - eta|)
//                              delta(tau - |eta|^alpha + |xi - eta|^alpha) d eta
//
// has the closed form (1 <= alpha <= 2, 0 <= tau <= alpha max{r,R}^{alpha-1} |xi|)
//
//   I = (2 pi / (alpha |xi|)) int_{a(tau,|xi|)}^inf
//         phi(rho) psi(omega(tau,rho)) omega(tau,rho)^{2-alpha} rho d rho,
//
//   a(tau,|xi|) = (|xi|^2 + tau^{2/alpha}) / (2 |xi|),
//   omega(tau,rho) = (rho^alpha - tau)^{1/alpha},
//
// and vanishes for tau above the threshold. closed_form_I evaluates the 1D
// integral; brute_force_I discretizes the 3D integral directly with a
// Gaussian mollifier in place of the delta and serves as its oracle.
// ---------------------------------------------------------------------------

/// Smooth compactly supported profile exp(1 - 1/(1 - y^2)), y = (rho-center)/width.
struct BumpProfile {
  double center = 1.0;
  double width = 0.5;

  double operator()(double rho) const {
    const double y = (rho - center) / width;
    if (std::abs(y) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - y * y));
  }
  double support_radius() const { return center + width; }
};

struct BumpPair {
  BumpProfile phi;
  BumpProfile psi;
};

/// tau threshold alpha * max{r, R}^{alpha-1} * |xi| above which I vanishes.
double vanishing_threshold(const BumpPair& pair, double xi_mag, double alpha);

double closed_form_I(const BumpPair& pair, double tau, double xi_mag, double alpha);

double brute_force_I(const BumpPair& pair, double tau, double xi_mag, double alpha,
                     double mollifier_width);

struct BruteForceValue {
  double value = 0.0;       // Richardson-extrapolated from eps and eps/2
  double rel_change = 0.0;  // |I(eps/2) - I(eps)| / scale
  bool converged = true;    // rel_change <= 0.5%
};
BruteForceValue brute_force_I_extrapolated(const BumpPair& pair, double tau,
                                           double xi_mag, double alpha, double eps);

// ---------------------------------------------------------------------------
// Dyadic scans: measured left/right sides of the bilinear and Strichartz
// estimates across (mu, lambda1, lambda2) triples.
// ---------------------------------------------------------------------------

struct DyadicEntry {
  double mu = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs when rhs > 0
};

struct DyadicReport {
  std::string estimate;  // which inequality the entries measure
  double alpha = 0.0;
  RadialGrid grid;
  std::string profile;
  std::vector<DyadicEntry> entries;

  double sup_ratio() const {
    double s = 0.0;
    for (const auto& e : entries) s = std::max(s, e.ratio);
    return s;
  }
};

/// Unit-L2 field with spectral profile exp(-((rho - center)/width)^2).
RadialField gaussian_band_profile(const RadialGrid& grid, double center, double width);

/// || P_mu ( S(t) P_l1 f . S(-t) P_l2 g ) ||_{L2_{t,x}} against
/// mu lambda2^{(1-alpha)/2} ||P_l1 f|| ||P_l2 g||. Window defaults to
/// 8 / (alpha lambda2^{alpha-1} mu) when t_window <= 0.
DyadicEntry bilinear_scan(DyadicIndex l1, DyadicIndex l2, DyadicIndex mu,
                          const RadialField& f, const RadialField& g, double alpha,
                          double t_window = 0.0);

/// || P_{<=mu} ( P_l1 u1 . conj(P_l2 u2) ) || for forward free flows, against
/// mu^{(3-alpha)/2} (mu/lambda1)^{(alpha-1)/2} ||P_l1 f|| ||P_l2 g||.
DyadicEntry bilinear_scan_leq(DyadicIndex mu, DyadicIndex l1, DyadicIndex l2,
                              const RadialField& f, const RadialField& g, double alpha,
                              double t_window = 0.0);

/// Band version against min{mu,l1,l2}^{1/2} l1^{(2-alpha)/4} l2^{(2-alpha)/4}
/// ||P_l1 f|| ||P_l2 g|| (single free flows are atoms).
DyadicEntry bernstein_scan(DyadicIndex mu, DyadicIndex l1, DyadicIndex l2,
                           const RadialField& f, const RadialField& g, double alpha,
                           double t_window = 0.0);

/// V^2 transference: atoms in place of free flows, V^2 norms on the right.
DyadicEntry transference_scan(const StepAtom& u1, const StepAtom& u2, DyadicIndex mu,
                              DyadicIndex l1, DyadicIndex l2, double alpha);

/// Random K-piece atom with pieces synthesized inside the band (lambda/2, 2 lambda).
StepAtom random_band_atom(const RadialGrid& grid, DyadicIndex band, std::size_t pieces,
                          double t_span, std::uint64_t seed, const ModelParams& params);

struct SumBilinearResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  // Exact dyadic decomposition of lhs^2 by the partition of unity:
  // lhs^2 = below_range + sum of shell masses + above_range to rounding.
  std::vector<std::pair<double, double>> shells;  // (mu, shell mass)
  double below_range = 0.0;
  double above_range = 0.0;
};

/// || (-Delta)^{(alpha-3)/4} (u conj v) ||_{L2_{t,x}} against the finite
/// dyadic X-norm proxy (sum_lambda ||P_lambda .||_{V^2}^2)^{1/2} per factor.
SumBilinearResult sum_bilinear_check(const StepAtom& u, const StepAtom& v, double alpha);

// ---------------------------------------------------------------------------
// Strichartz
// ---------------------------------------------------------------------------

struct StrichartzResult {
  double ratio = 0.0;       // windowed L^q_t L^r_x over ||f||_{H^theta}
  double main_norm = 0.0;   // windowed mixed norm
  double tail_estimate = 0.0;  // dispersive-decay extrapolation beyond the window
  double theta = 0.0;
  bool zero_input = false;
};

/// theta = (3/2)(2 - alpha)(1/2 - 1/r) for the admissible pair (q, r).
double strichartz_theta(double q, double r, double alpha);

StrichartzResult strichartz_ratio(const RadialField& f, double q, double r, double alpha,
                                  double t_window = 24.0, std::size_t n_steps = 768);

}  // namespace fhartree

#endif
