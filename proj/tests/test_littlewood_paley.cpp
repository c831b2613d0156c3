#include <doctest.h>

#include <cmath>

#include "fhartree/littlewood_paley.hpp"
#include "fhartree/norms.hpp"
#include "fhartree/transform.hpp"
#include "test_util.hpp"

using namespace fhartree;
using namespace fhartree::testing;

TEST_CASE("base cutoff: plateau, support, symmetry, smooth transition") {
  CHECK(BumpFamily::base_cutoff(0.5) == 1.0);
  CHECK(BumpFamily::base_cutoff(1.0) == 1.0);
  CHECK(BumpFamily::base_cutoff(3.0) == 0.0);
  CHECK(BumpFamily::base_cutoff(2.0) == 0.0);
  for (double s = -3.0; s <= 3.0; s += 0.17)
    CHECK(BumpFamily::base_cutoff(s) == BumpFamily::base_cutoff(-s));
  for (double s = 1.05; s < 2.0; s += 0.1) {
    const double v = BumpFamily::base_cutoff(s);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("annulus bump vanishes off (1/2, 2)") {
  CHECK(BumpFamily::annulus(0.5) == 0.0);
  CHECK(BumpFamily::annulus(0.3) == 0.0);
  CHECK(BumpFamily::annulus(2.0) == 0.0);
  CHECK(BumpFamily::annulus(2.5) == 0.0);
  CHECK(BumpFamily::annulus(1.0) > 0.0);
  // Value 1 on the inner plateau [1, 2) intersect (1/2, 2): chi = 1 - rho(2s).
  CHECK(BumpFamily::annulus(1.0) == 1.0);
}

TEST_CASE("partition of unity on the resolvable range") {
  const RadialGrid g(1024, 32.0);
  const DyadicRange range = resolvable_dyadic_range(g);
  const BumpFamily b = build_bump();
  double worst = 0.0;
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double rho = g.freq(k);
    if (rho < 2.0 * std::ldexp(1.0, range.min_exponent) ||
        rho > std::ldexp(1.0, range.max_exponent))
      continue;  // boundary octaves excluded: the dyadic family is truncated
    double sum = 0.0;
    for (int e = range.min_exponent - 2; e <= range.max_exponent + 2; ++e)
      sum += b.band(rho, std::ldexp(1.0, e));
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("band-limited field is reconstructed by the dyadic sum") {
  const RadialGrid g(1024, 32.0);
  const SpectralField F = SpectralField::from_function(g, [](double rho) {
    return cplx(std::exp(-4.0 * (rho - 3.0) * (rho - 3.0)),
                0.4 * std::exp(-4.0 * (rho - 5.0) * (rho - 5.0)));
  });
  const DyadicRange range = resolvable_dyadic_range(g);
  SpectralField sum(g);
  for (int e = range.min_exponent; e <= range.max_exponent; ++e)
    axpy(sum, cplx(1.0, 0.0), project(F, DyadicIndex(e)));
  CHECK(l2_distance(sum, F) / l2_norm(F) < 1e-8);
}

TEST_CASE("tilde projector is the identity on a band, bit exact") {
  const RadialGrid g(512, 16.0);
  const SpectralField F = SpectralField::from_function(g, [](double rho) {
    return cplx(std::sin(rho), std::cos(2.0 * rho));
  });
  const DyadicIndex mid(2);
  const SpectralField band = project(F, mid);
  const SpectralField again = project_tilde(band, mid);
  for (std::size_t i = 0; i < band.size(); ++i) CHECK(again[i] == band[i]);
}

TEST_CASE("projection annihilates disjoint spectral support") {
  const RadialGrid g(512, 16.0);
  // Support strictly inside (4, 8): bands at 2^1 (support (1,4)) must kill it.
  const SpectralField F = SpectralField::from_function(g, [](double rho) {
    return (rho > 4.5 && rho < 7.5) ? cplx(1.0, -1.0) : cplx(0.0, 0.0);
  });
  const SpectralField low = project(F, DyadicIndex(1));
  CHECK(l2_norm(low) == 0.0);

  // Almost orthogonality: P_a P_b = 0 when the exponents differ by >= 2.
  const SpectralField wide = SpectralField::from_function(
      g, [](double rho) { return cplx(std::exp(-0.1 * rho), 0.0); });
  const SpectralField nested = project(project(wide, DyadicIndex(1)), DyadicIndex(3));
  CHECK(l2_norm(nested) == 0.0);
}

TEST_CASE("projector L2 bound and complements") {
  const RadialGrid g(512, 16.0);
  const SpectralField F = SpectralField::from_function(g, [](double rho) {
    return cplx(std::exp(-0.2 * rho) * std::sin(3.0 * rho), 0.1 * rho * std::exp(-rho));
  });
  const DyadicIndex lam(1);
  CHECK(l2_norm(project(F, lam)) <= l2_norm(F) * (1.0 + 1e-6));
  CHECK(l2_norm(project_leq(F, lam)) <= l2_norm(F) * (1.0 + 1e-6));

  // P_leq + P_gt = identity, sample exact.
  const SpectralField lo = project_leq(F, lam);
  const SpectralField hi = project_gt(F, lam);
  for (std::size_t i = 0; i < F.size(); ++i) {
    const cplx back = lo[i] + hi[i];
    CHECK(std::abs(back - F[i]) <= 4e-16 * std::abs(F[i]));
  }
}

TEST_CASE("out-of-range dyadic scales are rejected, not clamped") {
  const RadialGrid g(512, 16.0);
  const DyadicRange range = resolvable_dyadic_range(g);
  const SpectralField F(g);
  CHECK_THROWS_AS((void)project(F, DyadicIndex(range.max_exponent + 1)), invalid_input);
  CHECK_THROWS_AS((void)project_leq(F, DyadicIndex(range.min_exponent - 1)),
                  invalid_input);
}

TEST_CASE("physical-side projection round trips through the transform") {
  const RadialGrid g(512, 16.0);
  const RadialField f = gaussian_field(g);
  const RadialField banded = project(f, DyadicIndex(0));
  const SpectralField direct = project(forward_transform(f), DyadicIndex(0));
  CHECK(l2_distance(forward_transform(banded), direct) / l2_norm(direct) < 1e-10);
}
