#include "fhartree/littlewood_paley.hpp"

#include <cmath>

#include "fhartree/transform.hpp"

namespace fhartree {

namespace {
inline double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

void check_range(const RadialGrid& g, DyadicIndex lambda, const char* who) {
  const DyadicRange range = resolvable_dyadic_range(g);
  if (!range.contains(lambda))
    throw invalid_input(std::string(who) + ": dyadic scale 2^" +
                        std::to_string(lambda.exponent) +
                        " outside resolvable range [2^" +
                        std::to_string(range.min_exponent) + ", 2^" +
                        std::to_string(range.max_exponent) + "]");
}

template <class Mult>
SpectralField apply_multiplier(const SpectralField& F, Mult&& m) {
  SpectralField out(F.grid);
  for (std::size_t k = 1; k <= F.grid.n_points; ++k)
    out[k - 1] = m(F.grid.freq(k)) * F[k - 1];
  return out;
}

template <class Op>
RadialField through_spectral(const RadialField& f, Op&& op) {
  return inverse_transform(op(forward_transform(f)));
}
}  // namespace

double BumpFamily::base_cutoff(double s) {
  const double a = std::abs(s);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double up = psi(2.0 - a);
  return up / (up + psi(a - 1.0));
}

double BumpFamily::annulus(double s) {
  const double a = std::abs(s);
  return base_cutoff(a) - base_cutoff(2.0 * a);
}

BumpFamily build_bump() { return BumpFamily{}; }

SpectralField project(const SpectralField& F, DyadicIndex lambda) {
  check_range(F.grid, lambda, "project");
  const BumpFamily b;
  const double l = lambda.value();
  return apply_multiplier(F, [&](double rho) { return b.band(rho, l); });
}

SpectralField project_leq(const SpectralField& F, DyadicIndex lambda) {
  check_range(F.grid, lambda, "project_leq");
  const BumpFamily b;
  const double l = lambda.value();
  return apply_multiplier(F, [&](double rho) { return b.low_pass(rho, l); });
}

SpectralField project_gt(const SpectralField& F, DyadicIndex lambda) {
  check_range(F.grid, lambda, "project_gt");
  const BumpFamily b;
  const double l = lambda.value();
  return apply_multiplier(F, [&](double rho) { return b.high_pass(rho, l); });
}

SpectralField project_tilde(const SpectralField& F, DyadicIndex lambda) {
  check_range(F.grid, lambda, "project_tilde");
  const BumpFamily b;
  const double l = lambda.value();
  return apply_multiplier(F, [&](double rho) { return b.wide_band(rho, l); });
}

RadialField project(const RadialField& f, DyadicIndex lambda) {
  return through_spectral(f, [&](const SpectralField& F) { return project(F, lambda); });
}
RadialField project_leq(const RadialField& f, DyadicIndex lambda) {
  return through_spectral(f, [&](const SpectralField& F) { return project_leq(F, lambda); });
}
RadialField project_gt(const RadialField& f, DyadicIndex lambda) {
  return through_spectral(f, [&](const SpectralField& F) { return project_gt(F, lambda); });
}
RadialField project_tilde(const RadialField& f, DyadicIndex lambda) {
  return through_spectral(f, [&](const SpectralField& F) { return project_tilde(F, lambda); });
}

}  // namespace fhartree
