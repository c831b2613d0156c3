#include "fhartree/estimates.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "fhartree/littlewood_paley.hpp"
#include "fhartree/norms.hpp"
#include "fhartree/regression.hpp"
#include "fhartree/transform.hpp"

namespace fhartree {

namespace {
void check_alpha_estimates(double alpha) {
  FH_REQUIRE(alpha >= 1.0 && alpha <= 2.0, "estimates: alpha must lie in [1, 2]");
}
}  // namespace

double vanishing_threshold(const BumpPair& pair, double xi_mag, double alpha) {
  const double ms = std::max(pair.phi.support_radius(), pair.psi.support_radius());
  return alpha * std::pow(ms, alpha - 1.0) * xi_mag;
}

double closed_form_I(const BumpPair& pair, double tau, double xi_mag, double alpha) {
  check_alpha_estimates(alpha);
  FH_REQUIRE(tau >= 0.0, "closed_form_I: tau must be >= 0 (use the swap symmetry)");
  FH_REQUIRE(xi_mag > 0.0, "closed_form_I: |xi| must be positive");
  if (tau > vanishing_threshold(pair, xi_mag, alpha)) return 0.0;

  auto omega = [&](double rho) {
    return std::pow(std::max(std::pow(rho, alpha) - tau, 0.0), 1.0 / alpha);
  };

  // The delta fires where the polar cosine b*(rho) = (xi^2 + rho^2 - omega^2)
  // / (2 xi rho) lies in [-1, 1]. b* >= -1 holds automatically for tau >= 0
  // (omega <= rho); b* <= 1 means omega(tau, rho) >= |rho - xi|, whose left
  // side minus right side increases in rho, so the domain is [rho_c, inf)
  // with rho_c the unique crossing. The frequently quoted lower limit
  // a(tau,|xi|) = (|xi|^2 + tau^{2/alpha}) / (2 |xi|) relaxes this via
  // (rho^alpha - tau)^{2/alpha} <= rho^2 - tau^{2/alpha} and coincides with
  // rho_c only at alpha = 2 (or tau = 0); for alpha < 2 and large tau it
  // undershoots, which the brute-force oracle exposes.
  auto slack = [&](double rho) { return omega(rho) - std::abs(rho - xi_mag); };
  const double hi_phi = pair.phi.support_radius();
  const double hi_psi =
      std::pow(std::pow(pair.psi.support_radius(), alpha) + tau, 1.0 / alpha);
  const double hi = std::min(hi_phi, hi_psi);

  double lo = std::pow(tau, 1.0 / alpha);
  if (slack(hi) <= 0.0) return 0.0;
  if (slack(lo) < 0.0) {
    double neg = lo, pos = hi;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (neg + pos);
      (slack(mid) < 0.0 ? neg : pos) = mid;
    }
    lo = pos;
  }
  const double a = (xi_mag * xi_mag + std::pow(tau, 2.0 / alpha)) / (2.0 * xi_mag);
  lo = std::max(lo, a);  // rho_c >= a; guards rounding at the tau = 0 limit
  if (!(hi > lo)) return 0.0;

  auto integrand = [&](double rho) {
    const double om = omega(rho);
    return pair.phi(rho) * pair.psi(om) * std::pow(om, 2.0 - alpha) * rho;
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi,
                                                                    12, 1e-10);
  return 2.0 * pi / (alpha * xi_mag) * integral;
}

double brute_force_I(const BumpPair& pair, double tau, double xi_mag, double alpha,
                     double mollifier_width) {
  check_alpha_estimates(alpha);
  FH_REQUIRE(tau >= 0.0, "brute_force_I: tau must be >= 0");
  FH_REQUIRE(xi_mag > 0.0 && mollifier_width > 0.0,
             "brute_force_I: need |xi| > 0 and mollifier width > 0");
  const double eps = mollifier_width;

  // Axial symmetry reduces the eta-integral to (rho, b), b the cosine of the
  // polar angle against xi:
  //   I ~= int 2 pi rho^2 phi(rho) psi(w) delta_eps(g) db drho,
  //   w(rho,b) = sqrt(xi^2 - 2 xi rho b + rho^2),  g = tau - rho^alpha + w^alpha.
  // g is strictly decreasing in b, so the mollified delta only sees a narrow
  // b-window located by bisection; quadrature outside it is skipped.
  const double lo_rho = std::max(pair.phi.center - pair.phi.width, 0.0);
  const double hi_rho = pair.phi.support_radius();
  // Keep the phase variation per rho cell below eps / 3 (the stated
  // precondition): |dg/drho| <= alpha (rho^{a-1} + w^{a-1}) on the domain.
  const double grad_bound =
      alpha * (std::pow(hi_rho, alpha - 1.0) +
               std::pow(hi_rho + xi_mag, alpha - 1.0));
  const std::size_t n_rho = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(3.0 * (hi_rho - lo_rho) * grad_bound / eps)),
      768, 16384);
  const std::size_t n_b = 256;
  const double band = 10.0 * eps;

  auto w_of = [&](double rho, double b) {
    const double s = xi_mag * xi_mag - 2.0 * xi_mag * rho * b + rho * rho;
    return std::sqrt(std::max(s, 0.0));
  };
  auto g_of = [&](double rho, double b) {
    return tau - std::pow(rho, alpha) + std::pow(w_of(rho, b), alpha);
  };
  const double mollifier_norm = 1.0 / (std::sqrt(2.0 * pi) * eps);
  auto delta_eps = [&](double g) {
    return mollifier_norm * std::exp(-0.5 * g * g / (eps * eps));
  };

  // Locate b with g(rho, b) = target (g decreasing in b); clamped to [-1, 1].
  auto solve_b = [&](double rho, double target) {
    double lo = -1.0, hi = 1.0;
    if (g_of(rho, lo) <= target) return lo;
    if (g_of(rho, hi) >= target) return hi;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g_of(rho, mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  double acc = 0.0;
  const double drho = (hi_rho - lo_rho) / static_cast<double>(n_rho);
  for (std::size_t i = 0; i < n_rho; ++i) {
    const double rho = lo_rho + (static_cast<double>(i) + 0.5) * drho;
    const double fphi = pair.phi(rho);
    if (fphi == 0.0) continue;
    if (g_of(rho, -1.0) < -band || g_of(rho, 1.0) > band) continue;
    const double b_hi = solve_b(rho, -band);  // g decreasing: -band is the upper b
    const double b_lo = solve_b(rho, band);
    if (!(b_hi > b_lo)) continue;
    const double db = (b_hi - b_lo) / static_cast<double>(n_b);
    double inner = 0.0;
    for (std::size_t j = 0; j <= n_b; ++j) {
      const double b = b_lo + static_cast<double>(j) * db;
      const double weight = (j == 0 || j == n_b) ? 0.5 : 1.0;
      inner += weight * pair.psi(w_of(rho, b)) * delta_eps(g_of(rho, b));
    }
    acc += fphi * rho * rho * inner * db * drho;
  }
  return 2.0 * pi * acc;
}

BruteForceValue brute_force_I_extrapolated(const BumpPair& pair, double tau,
                                           double xi_mag, double alpha, double eps) {
  const double coarse = brute_force_I(pair, tau, xi_mag, alpha, eps);
  const double fine = brute_force_I(pair, tau, xi_mag, alpha, 0.5 * eps);
  BruteForceValue out;
  out.value = (4.0 * fine - coarse) / 3.0;  // O(eps^2) mollifier error model
  const double scale = std::max({std::abs(coarse), std::abs(fine), 1e-300});
  out.rel_change = std::abs(fine - coarse) / scale;
  out.converged = out.rel_change <= 5e-3;
  return out;
}

// ---------------------------------------------------------------------------
// Scan core
// ---------------------------------------------------------------------------

namespace {

/// Trapezoid \int_{t_lo}^{t_hi} || m(rho) FT(a(t) b(t)) ||^2 dt for physical
/// factors produced by `factors(t, a, b)` and a spectral weight multiplier.
template <class Factors, class PerSlice>
double spacetime_weighted_l2_sq(const RadialGrid& grid, double t_lo, double t_hi,
                                std::size_t n_steps, Factors&& factors,
                                const std::vector<double>& weight_sq,
                                PerSlice&& per_slice) {
  FH_REQUIRE(t_hi > t_lo && n_steps >= 8, "scan: bad time window");
  const double dt = (t_hi - t_lo) / static_cast<double>(n_steps);
  const double measure = grid.freq_spacing() / (2.0 * pi * pi);
  double acc = 0.0;
  RadialField a(grid), b(grid);
  for (std::size_t s = 0; s <= n_steps; ++s) {
    const double t = t_lo + static_cast<double>(s) * dt;
    factors(t, a, b);
    const SpectralField H = forward_transform(pointwise_product(a, b));
    double slice = 0.0;
    for (std::size_t k = 1; k <= grid.n_points; ++k) {
      const double rho = grid.freq(k);
      slice += weight_sq[k - 1] * rho * rho * std::norm(H[k - 1]);
    }
    slice *= measure;
    const double w = (s == 0 || s == n_steps) ? 0.5 : 1.0;
    acc += w * slice * dt;
    per_slice(t, H, w * dt);
  }
  return acc;
}

struct NullSlice {
  void operator()(double, const SpectralField&, double) const {}
};

std::vector<double> band_weight_sq(const RadialGrid& grid, double mu) {
  const BumpFamily bump;
  std::vector<double> w(grid.n_points);
  for (std::size_t k = 1; k <= grid.n_points; ++k) {
    const double c = bump.band(grid.freq(k), mu);
    w[k - 1] = c * c;
  }
  return w;
}

std::vector<double> low_pass_weight_sq(const RadialGrid& grid, double mu) {
  const BumpFamily bump;
  std::vector<double> w(grid.n_points);
  for (std::size_t k = 1; k <= grid.n_points; ++k) {
    const double c = bump.low_pass(grid.freq(k), mu);
    w[k - 1] = c * c;
  }
  return w;
}

void check_scan_aliasing(const RadialGrid& grid, double l1, double l2) {
  FH_REQUIRE(2.0 * std::max(l1, l2) < grid.freq_max() / 2.0,
             "scan: aliasing guard requires 2 max(lambda) < rho_max / 2");
}

/// Temporal resolution: the filtered product of band-(<= 2 lambda_max) flows
/// has temporal frequencies bounded by alpha (2 lambda_max)^{alpha-1} |xi|,
/// doubled for the squared modulus in the slice integrand.
std::size_t scan_steps(double t_lo, double t_hi, double alpha, double lambda_max,
                       double xi_max) {
  const double rate = 2.0 * alpha * std::pow(2.0 * lambda_max, alpha - 1.0) * xi_max;
  const double dt_target = 0.1 / std::max(rate, 1e-12);
  const auto n = static_cast<std::size_t>(std::ceil((t_hi - t_lo) / dt_target));
  return std::clamp<std::size_t>(n, 24, 4096);
}

double default_window(double alpha, double l2, double mu) {
  return 8.0 / (alpha * std::pow(l2, alpha - 1.0) * mu);
}

}  // namespace

RadialField gaussian_band_profile(const RadialGrid& grid, double center, double width) {
  SpectralField F = SpectralField::from_function(grid, [&](double rho) {
    const double y = (rho - center) / width;
    return cplx(std::exp(-y * y), 0.0);
  });
  const double n = l2_norm(F);
  FH_REQUIRE(n > 0.0, "gaussian_band_profile: empty band on this grid");
  for (auto& z : F.values) z /= n;
  return inverse_transform(F);
}

DyadicEntry bilinear_scan(DyadicIndex l1, DyadicIndex l2, DyadicIndex mu,
                          const RadialField& f, const RadialField& g, double alpha,
                          double t_window) {
  check_alpha_estimates(alpha);
  FH_REQUIRE(f.grid == g.grid, "bilinear_scan: grid mismatch");
  const double L1 = l1.value(), L2 = l2.value(), M = mu.value();
  FH_REQUIRE(L1 >= L2, "bilinear_scan: requires lambda1 >= lambda2");
  check_scan_aliasing(f.grid, L1, L2);

  const SpectralField Fl = project(forward_transform(f), l1);
  const SpectralField Gl = project(forward_transform(g), l2);
  const double nf = l2_norm(Fl), ng = l2_norm(Gl);

  DyadicEntry e;
  e.mu = M;
  e.lambda1 = L1;
  e.lambda2 = L2;
  e.rhs = M * std::pow(L2, 0.5 * (1.0 - alpha)) * nf * ng;
  if (nf == 0.0 || ng == 0.0) return e;

  const double T = t_window > 0.0 ? t_window : default_window(alpha, L2, M);
  const std::size_t steps = scan_steps(-T, T, alpha, L1, 2.0 * M);
  std::vector<double> rho_alpha(f.grid.n_points);
  for (std::size_t k = 1; k <= f.grid.n_points; ++k)
    rho_alpha[k - 1] = std::pow(f.grid.freq(k), alpha);

  auto factors = [&](double t, RadialField& a, RadialField& b) {
    SpectralField A = Fl, B = Gl;
    for (std::size_t i = 0; i < A.size(); ++i) {
      A[i] *= std::polar(1.0, -t * rho_alpha[i]);   // u+ = S(t) P_l1 f
      B[i] *= std::polar(1.0, t * rho_alpha[i]);    // v- = S(-t) P_l2 g
    }
    a = inverse_transform(A);
    b = inverse_transform(B);
  };
  const double lhs_sq = spacetime_weighted_l2_sq(
      f.grid, -T, T, steps, factors, band_weight_sq(f.grid, M), NullSlice{});
  e.lhs = std::sqrt(lhs_sq);
  e.ratio = e.rhs > 0.0 ? e.lhs / e.rhs : 0.0;
  return e;
}

namespace {

/// Shared body of the P_{<=mu} / P_mu scans with conjugated second factor.
DyadicEntry conjugate_flow_scan(DyadicIndex mu, DyadicIndex l1, DyadicIndex l2,
                                const RadialField& f, const RadialField& g,
                                double alpha, double t_window, bool low_pass,
                                double rhs_factor) {
  check_alpha_estimates(alpha);
  FH_REQUIRE(f.grid == g.grid, "scan: grid mismatch");
  const double L1 = l1.value(), L2 = l2.value(), M = mu.value();
  check_scan_aliasing(f.grid, L1, L2);

  const SpectralField Fl = project(forward_transform(f), l1);
  const SpectralField Gl = project(forward_transform(g), l2);
  const double nf = l2_norm(Fl), ng = l2_norm(Gl);

  DyadicEntry e;
  e.mu = M;
  e.lambda1 = L1;
  e.lambda2 = L2;
  e.rhs = rhs_factor * nf * ng;
  if (nf == 0.0 || ng == 0.0) return e;

  const double T = t_window > 0.0 ? t_window : default_window(alpha, L2, M);
  const double xi_max = std::min(2.0 * M, 2.0 * (L1 + L2));
  const std::size_t steps = scan_steps(-T, T, alpha, std::max(L1, L2), xi_max);
  std::vector<double> rho_alpha(f.grid.n_points);
  for (std::size_t k = 1; k <= f.grid.n_points; ++k)
    rho_alpha[k - 1] = std::pow(f.grid.freq(k), alpha);

  auto factors = [&](double t, RadialField& a, RadialField& b) {
    SpectralField A = Fl, B = Gl;
    for (std::size_t i = 0; i < A.size(); ++i) {
      A[i] *= std::polar(1.0, -t * rho_alpha[i]);
      B[i] *= std::polar(1.0, -t * rho_alpha[i]);
    }
    a = inverse_transform(A);
    b = conjugate(inverse_transform(B));  // conj(P_l2 u2)
  };
  const auto weights =
      low_pass ? low_pass_weight_sq(f.grid, M) : band_weight_sq(f.grid, M);
  const double lhs_sq =
      spacetime_weighted_l2_sq(f.grid, -T, T, steps, factors, weights, NullSlice{});
  e.lhs = std::sqrt(lhs_sq);
  e.ratio = e.rhs > 0.0 ? e.lhs / e.rhs : 0.0;
  return e;
}

}  // namespace

DyadicEntry bilinear_scan_leq(DyadicIndex mu, DyadicIndex l1, DyadicIndex l2,
                              const RadialField& f, const RadialField& g, double alpha,
                              double t_window) {
  const double L1 = l1.value(), M = mu.value();
  const double rhs_factor = std::pow(M, 0.5 * (3.0 - alpha)) *
                            std::pow(M / L1, 0.5 * (alpha - 1.0));
  return conjugate_flow_scan(mu, l1, l2, f, g, alpha, t_window, /*low_pass=*/true,
                             rhs_factor);
}

DyadicEntry bernstein_scan(DyadicIndex mu, DyadicIndex l1, DyadicIndex l2,
                           const RadialField& f, const RadialField& g, double alpha,
                           double t_window) {
  const double L1 = l1.value(), L2 = l2.value(), M = mu.value();
  const double rhs_factor = std::sqrt(std::min({M, L1, L2})) *
                            std::pow(L1, 0.25 * (2.0 - alpha)) *
                            std::pow(L2, 0.25 * (2.0 - alpha));
  return conjugate_flow_scan(mu, l1, l2, f, g, alpha, t_window, /*low_pass=*/false,
                             rhs_factor);
}

// ---------------------------------------------------------------------------
// Atom scans
// ---------------------------------------------------------------------------

namespace {

/// Integrate || m FT(a1(t) conj(a2(t))) ||^2 over the overlap of the atom
/// supports, piecewise over the merged partition so each sub-interval sees
/// smooth free flows. `xi_max` is the spatial-frequency reach of the output
/// weight, which sets the temporal resolution of the slices.
template <class PerSlice>
double atom_product_l2_sq(const StepAtom& a1, const StepAtom& a2, double alpha,
                          const std::vector<double>& weight_sq, double xi_max,
                          std::size_t steps_cap, PerSlice&& per_slice) {
  const RadialGrid& grid = a1.pieces[0].grid;
  const double lo = std::max(a1.knots.front(), a2.knots.front());
  const double hi = std::min(a1.knots.back(), a2.knots.back());
  if (!(hi > lo)) return 0.0;

  std::vector<double> cuts;
  for (double t : a1.knots)
    if (t > lo && t < hi) cuts.push_back(t);
  for (double t : a2.knots)
    if (t > lo && t < hi) cuts.push_back(t);
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-13; }),
             cuts.end());

  // Spectral support bound for the temporal resolution rule.
  double band_top = grid.freq_min();
  for (const auto* atom : {&a1, &a2})
    for (const auto& piece : atom->pieces)
      for (std::size_t k = 1; k <= grid.n_points; ++k)
        if (std::abs(piece[k - 1]) > 1e-12) band_top = std::max(band_top, grid.freq(k));

  std::vector<double> rho_alpha(grid.n_points);
  for (std::size_t k = 1; k <= grid.n_points; ++k)
    rho_alpha[k - 1] = std::pow(grid.freq(k), alpha);

  double acc = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double t0 = cuts[c], t1 = cuts[c + 1];
    const double mid = 0.5 * (t0 + t1);
    const SpectralField p1 = a1.evaluate_spectral(mid);
    const SpectralField p2 = a2.evaluate_spectral(mid);
    // evaluate_spectral already carries the phase at `mid`; rebase inside.
    const std::size_t steps = std::min(
        steps_cap, scan_steps(t0, t1, alpha, band_top / 2.0, xi_max));
    auto factors = [&](double t, RadialField& x, RadialField& y) {
      SpectralField A = p1, B = p2;
      for (std::size_t i = 0; i < A.size(); ++i) {
        const cplx ph = std::polar(1.0, -(t - mid) * rho_alpha[i]);
        A[i] *= ph;
        B[i] *= ph;
      }
      x = inverse_transform(A);
      y = conjugate(inverse_transform(B));
    };
    acc += spacetime_weighted_l2_sq(grid, t0, t1, steps, factors, weight_sq,
                                    per_slice);
  }
  return acc;
}

}  // namespace

DyadicEntry transference_scan(const StepAtom& u1, const StepAtom& u2, DyadicIndex mu,
                              DyadicIndex l1, DyadicIndex l2, double alpha) {
  check_alpha_estimates(alpha);
  u1.validate();
  u2.validate();
  FH_REQUIRE(u1.pieces[0].grid == u2.pieces[0].grid, "transference_scan: grid mismatch");
  const double L1 = l1.value(), L2 = l2.value(), M = mu.value();
  check_scan_aliasing(u1.pieces[0].grid, L1, L2);

  const StepAtom a1 = project(u1, l1);
  const StepAtom a2 = project(u2, l2);

  DyadicEntry e;
  e.mu = M;
  e.lambda1 = L1;
  e.lambda2 = L2;
  const double v1 = v2_norm_exact(a1);
  const double v2 = v2_norm_exact(a2);
  e.rhs = std::pow(M, 0.5 * (3.0 - alpha)) * std::pow(M / L1, 0.5 * (alpha - 1.0)) *
          v1 * v2;
  if (v1 == 0.0 || v2 == 0.0) return e;

  const auto weights = low_pass_weight_sq(u1.pieces[0].grid, M);
  e.lhs = std::sqrt(atom_product_l2_sq(a1, a2, alpha, weights, 2.0 * M, 2048,
                                       NullSlice{}));
  e.ratio = e.rhs > 0.0 ? e.lhs / e.rhs : 0.0;
  return e;
}

StepAtom random_band_atom(const RadialGrid& grid, DyadicIndex band, std::size_t pieces,
                          double t_span, std::uint64_t seed, const ModelParams& params) {
  FH_REQUIRE(pieces >= 1 && t_span > 0.0, "random_band_atom: bad shape");
  const double L = band.value();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const BumpFamily bump;

  StepAtom atom;
  atom.params = params;
  atom.knots.push_back(0.0);
  std::vector<double> interior;
  for (std::size_t i = 0; i + 1 < pieces; ++i)
    interior.push_back(t_span * (0.15 + 0.7 * unit(rng)));
  std::sort(interior.begin(), interior.end());
  for (double t : interior) atom.knots.push_back(t);
  atom.knots.push_back(t_span);
  // Collisions are astronomically unlikely but knots must strictly increase.
  for (std::size_t i = 1; i < atom.knots.size(); ++i)
    FH_REQUIRE(atom.knots[i] > atom.knots[i - 1], "random_band_atom: knot collision");

  for (std::size_t k = 0; k < pieces; ++k) {
    SpectralField piece(grid);
    const int n_modes = 3;
    std::vector<double> centers(n_modes), widths(n_modes);
    std::vector<cplx> amps(n_modes);
    for (int m = 0; m < n_modes; ++m) {
      centers[m] = L * (0.7 + 0.9 * unit(rng));
      widths[m] = L * (0.06 + 0.08 * unit(rng));
      amps[m] = cplx(gauss(rng), gauss(rng));
    }
    for (std::size_t i = 1; i <= grid.n_points; ++i) {
      const double rho = grid.freq(i);
      cplx v(0.0, 0.0);
      for (int m = 0; m < n_modes; ++m) {
        const double y = (rho - centers[m]) / widths[m];
        v += amps[m] * std::exp(-y * y);
      }
      piece[i - 1] = v * bump.band(rho, L);  // hard band localization
    }
    atom.pieces.push_back(std::move(piece));
  }
  return atom;
}

SumBilinearResult sum_bilinear_check(const StepAtom& u, const StepAtom& v, double alpha) {
  FH_REQUIRE(alpha > 1.0 && alpha <= 2.0, "sum_bilinear_check: requires 1 < alpha <= 2");
  u.validate();
  v.validate();
  const RadialGrid& grid = u.pieces[0].grid;
  FH_REQUIRE(grid == v.pieces[0].grid, "sum_bilinear_check: grid mismatch");

  // Weight rho^{(alpha-3)/2}, squared in the accumulator.
  std::vector<double> weight_sq(grid.n_points);
  for (std::size_t k = 1; k <= grid.n_points; ++k)
    weight_sq[k - 1] = std::pow(grid.freq(k), alpha - 3.0);

  const DyadicRange range = resolvable_dyadic_range(grid);
  std::vector<double> shell_mass(
      static_cast<std::size_t>(range.max_exponent - range.min_exponent + 1), 0.0);
  double below = 0.0, above = 0.0;
  const BumpFamily bump;
  const double measure = grid.freq_spacing() / (2.0 * pi * pi);
  const double lam_bottom = std::ldexp(1.0, range.min_exponent - 1);
  const double lam_top = std::ldexp(1.0, range.max_exponent);

  auto per_slice = [&](double, const SpectralField& H, double wdt) {
    for (int e = range.min_exponent; e <= range.max_exponent; ++e) {
      const double lam = std::ldexp(1.0, e);
      double m = 0.0;
      for (std::size_t k = 1; k <= grid.n_points; ++k) {
        const double rho = grid.freq(k);
        const double chi = bump.band(rho, lam);
        if (chi == 0.0) continue;
        m += chi * weight_sq[k - 1] * rho * rho * std::norm(H[k - 1]);
      }
      shell_mass[static_cast<std::size_t>(e - range.min_exponent)] += m * measure * wdt;
    }
    double b = 0.0, a = 0.0;
    for (std::size_t k = 1; k <= grid.n_points; ++k) {
      const double rho = grid.freq(k);
      const double w = weight_sq[k - 1] * rho * rho * std::norm(H[k - 1]);
      b += bump.low_pass(rho, lam_bottom) * w;
      a += bump.high_pass(rho, lam_top) * w;
    }
    below += b * measure * wdt;
    above += a * measure * wdt;
  };

  // The rho^{alpha-3} weight decays, so under-resolving the very highest
  // beat frequencies costs little; cap the per-interval step count.
  double band_top = grid.freq_min();
  for (const auto* atom : {&u, &v})
    for (const auto& piece : atom->pieces)
      for (std::size_t k = 1; k <= grid.n_points; ++k)
        if (std::abs(piece[k - 1]) > 1e-12) band_top = std::max(band_top, grid.freq(k));

  SumBilinearResult out;
  const double lhs_sq =
      atom_product_l2_sq(u, v, alpha, weight_sq, 2.0 * band_top, 1536, per_slice);
  out.lhs = std::sqrt(lhs_sq);
  out.below_range = below;
  out.above_range = above;
  for (int e = range.min_exponent; e <= range.max_exponent; ++e)
    out.shells.emplace_back(std::ldexp(1.0, e),
                            shell_mass[static_cast<std::size_t>(e - range.min_exponent)]);

  auto x_proxy = [&](const StepAtom& atom) {
    double acc = 0.0;
    for (int e = range.min_exponent; e <= range.max_exponent; ++e) {
      const double n = v2_norm_exact(project(atom, DyadicIndex(e)));
      acc += n * n;
    }
    return std::sqrt(acc);
  };
  out.rhs = x_proxy(u) * x_proxy(v);
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Strichartz
// ---------------------------------------------------------------------------

double strichartz_theta(double q, double r, double alpha) {
  FH_REQUIRE(q > 2.0 && r >= 2.0, "strichartz: need q > 2 and r >= 2");
  FH_REQUIRE(std::abs(2.0 / q + 3.0 / r - 1.5) < 1e-9,
             "strichartz: (q, r) must satisfy 2/q + 3/r = 3/2");
  return 1.5 * (2.0 - alpha) * (0.5 - 1.0 / r);
}

StrichartzResult strichartz_ratio(const RadialField& f, double q, double r, double alpha,
                                  double t_window, std::size_t n_steps) {
  FH_REQUIRE(alpha > 1.0 && alpha <= 2.0, "strichartz: requires 1 < alpha <= 2");
  StrichartzResult out;
  out.theta = strichartz_theta(q, r, alpha);

  const SpectralField F = forward_transform(f);
  const double denom = sobolev_norm(F, out.theta);
  if (denom == 0.0) {
    out.zero_input = true;
    return out;
  }

  const RadialGrid& g = f.grid;
  std::vector<double> rho_alpha(g.n_points);
  for (std::size_t k = 1; k <= g.n_points; ++k)
    rho_alpha[k - 1] = std::pow(g.freq(k), alpha);

  const double dt = 2.0 * t_window / static_cast<double>(n_steps);
  double acc = 0.0;
  std::vector<double> pos_t, pos_norm;  // for the tail fit
  for (std::size_t s = 0; s <= n_steps; ++s) {
    const double t = -t_window + static_cast<double>(s) * dt;
    SpectralField Ft = F;
    for (std::size_t i = 0; i < Ft.size(); ++i)
      Ft[i] *= std::polar(1.0, -t * rho_alpha[i]);
    const double nr = lp_norm(inverse_transform(Ft), r);
    const double w = (s == 0 || s == n_steps) ? 0.5 : 1.0;
    acc += w * std::pow(nr, q) * dt;
    if (t >= 0.55 * t_window && nr > 0.0) {
      pos_t.push_back(t);
      pos_norm.push_back(nr);
    }
  }
  out.main_norm = std::pow(acc, 1.0 / q);

  // Tail by dispersive-decay extrapolation: ||u(t)||_r ~ A t^p beyond the
  // window; both tails counted, reported separately from the ratio's input.
  if (pos_t.size() >= 3) {
    const LineFit fit = fit_loglog(pos_t, pos_norm);
    const double pq = fit.slope * q;
    if (pq < -1.0) {
      const double A = std::exp(fit.intercept);
      const double tail_int =
          2.0 * std::pow(A, q) * std::pow(t_window, pq + 1.0) / (-(pq + 1.0));
      out.tail_estimate = std::pow(tail_int, 1.0 / q);
    }
  }
  out.ratio = out.main_norm / denom;
  return out;
}

}  // namespace fhartree
