#include <doctest.h>

#include <cmath>

#include "fhartree/illposedness.hpp"
#include "fhartree/norms.hpp"
#include "fhartree/regression.hpp"
#include "fhartree/transform.hpp"
#include "test_util.hpp"

using namespace fhartree;
using namespace fhartree::testing;

namespace {
const ModelParams kParams{1.5, 1.0};
}

TEST_CASE("annulus datum: sharp spectral indicator and aliasing guard") {
  const RadialGrid g(2048, 32.0);
  const AnnulusDatum d = build_annulus(8.0, g);
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double rho = g.freq(k);
    const double v = d.spectral[k - 1].real();
    if (rho >= 8.0 && rho <= 16.0)
      CHECK(v == 1.0);
    else
      CHECK(v == 0.0);
  }
  CHECK_THROWS_AS((void)build_annulus(60.0, g), invalid_input);
}

TEST_CASE("annulus datum: Plancherel volume identity") {
  const RadialGrid g(4096, 64.0);
  for (double lambda : {8.0, 16.0}) {
    const AnnulusDatum d = build_annulus(lambda, g);
    const double volume = 4.0 * pi / 3.0 * 7.0 * lambda * lambda * lambda;
    const double expect = volume / std::pow(2.0 * pi, 3.0);
    const double got = l2_norm(d.spectral) * l2_norm(d.spectral);
    CHECK(rel_err(got, expect) < 0.01);
  }
}

TEST_CASE("annulus datum: H^s norm scaling") {
  const RadialGrid g(2048, 32.0);
  const double s = -0.25;
  std::vector<double> lams, norms;
  for (double lambda : {4.0, 8.0, 16.0, 32.0}) {
    lams.push_back(lambda);
    norms.push_back(sobolev_norm(build_annulus(lambda, g).spectral, s));
  }
  const double slope = fit_loglog(lams, norms).slope;
  CHECK(std::abs(slope - (s + 1.5)) < 0.03);
}

TEST_CASE("first Picard term: zero at t = 0 and linear growth in t") {
  const RadialGrid g(2048, 32.0);
  const AnnulusDatum d = build_annulus(8.0, g);
  CHECK(l2_norm(first_picard_term(d, 0.0, kParams)) == 0.0);

  // Near-stationary phase: ||Phi(t)|| proportional to t over a 4x range.
  const double T = 0.04 * std::pow(8.0, -kParams.alpha);
  std::vector<double> per_t;
  for (double frac : {0.25, 0.5, 1.0})
    per_t.push_back(l2_norm(first_picard_term(d, frac * T, kParams)) / (frac * T));
  for (double v : per_t) CHECK(rel_err(v, per_t.front()) < 0.05);
}

TEST_CASE("phase sampler respects the annulus bound") {
  for (double alpha : {1.5, 2.0}) {
    for (double lambda : {4.0, 16.0}) {
      const double worst = max_phase_sample(lambda, alpha, 20000, 321);
      // |g_alpha| <= 2 ((2 lambda)^alpha - lambda^alpha) on the integrand
      // support; the invariant needs |t g| < 10 eps at t = eps lambda^{-alpha}.
      CHECK(worst < 10.0 * std::pow(lambda, alpha));
      CHECK(worst <= 2.0 * (std::pow(2.0 * lambda, alpha) - std::pow(lambda, alpha)) *
                         (1.0 + 1e-12));
    }
  }
}

TEST_CASE("cubic term is spectrally supported below 6 lambda") {
  const RadialGrid g(2048, 32.0);
  const double lambda = 8.0;
  const AnnulusDatum d = build_annulus(lambda, g);
  const double T = 0.05 * std::pow(lambda, -kParams.alpha);
  const SpectralField Phi = forward_transform(first_picard_term(d, T, kParams));
  double peak = 0.0, leak = 0.0;
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double v = std::abs(Phi[k - 1]);
    if (g.freq(k) <= 6.0 * lambda)
      peak = std::max(peak, v);
    else
      leak = std::max(leak, v);
  }
  CHECK(leak < 1e-6 * peak);
}

TEST_CASE("growth experiment: slopes at s = -1/4 and validation") {
  const RadialGrid g(2048, 32.0);
  const GrowthRecord rec =
      growth_experiment({4.0, 8.0, 16.0, 32.0}, -0.25, kParams, 0.05, g);
  CHECK(std::abs(rec.slope_phi - 1.25) < 0.03);
  CHECK(std::abs(rec.slope_big_phi - 4.25) < 0.15);
  CHECK(std::abs(rec.slope_ratio - 0.5) < 0.1);
  CHECK(rec.rows.size() == 4);
  for (const auto& row : rec.rows) {
    CHECK(row.norm_phi > 0.0);
    CHECK(row.norm_big_phi > 0.0);
  }
  CHECK_THROWS_AS(
      (void)growth_experiment({4.0, 8.0}, -0.25, kParams, 0.05, g),
      invalid_input);  // needs >= 3 points
  CHECK_THROWS_AS(
      (void)growth_experiment({8.0, 4.0, 16.0}, -0.25, kParams, 0.05, g),
      invalid_input);  // ascending
}

TEST_CASE("growth slopes are reproducible across grid resolutions") {
  const GrowthRecord coarse =
      growth_experiment({4.0, 8.0, 16.0}, -0.25, kParams, 0.05, RadialGrid(2048, 32.0));
  const GrowthRecord fine =
      growth_experiment({4.0, 8.0, 16.0}, -0.25, kParams, 0.05, RadialGrid(4096, 64.0));
  CHECK(std::abs(coarse.slope_phi - fine.slope_phi) < 0.03);
  CHECK(std::abs(coarse.slope_big_phi - fine.slope_big_phi) < 0.15);
  CHECK(std::abs(coarse.slope_ratio - fine.slope_ratio) < 0.1);
}
