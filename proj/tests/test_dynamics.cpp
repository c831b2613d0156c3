#include <doctest.h>

#include <cmath>

#include "fhartree/dynamics.hpp"
#include "fhartree/estimates.hpp"
#include "fhartree/littlewood_paley.hpp"
#include "fhartree/norms.hpp"
#include "fhartree/transform.hpp"
#include "test_util.hpp"

using namespace fhartree;
using namespace fhartree::testing;

namespace {
const ModelParams kDefault{1.5, 1.0};
}

TEST_CASE("free propagation: identity at t = 0 and unitarity") {
  const RadialGrid g(512, 16.0);
  const RadialField f = gaussian_field(g);
  const RadialField same = free_propagate(f, 0.0, kDefault);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(same[i] == f[i]);

  const double n0 = l2_norm(forward_transform(f));
  for (double t : {0.1, 3.0, -7.5, 40.0}) {
    const SpectralField Ft = free_propagate(forward_transform(f), t, kDefault);
    CHECK(rel_err(l2_norm(Ft), n0) < 1e-10);
  }
}

TEST_CASE("free propagation: alpha = 2 Gaussian closed form") {
  const RadialGrid g(1024, 24.0);
  const ModelParams p{2.0, 0.0};
  const RadialField f = gaussian_field(g);
  for (double t : {0.25, 0.7}) {
    const RadialField u = free_propagate(f, t, p);
    const cplx den(1.0, 2.0 * t);
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < g.n_points; ++j) {
      const double r = g.radius(j);
      const cplx exact = std::pow(den, -1.5) * std::exp(-r * r / (2.0 * den));
      worst = std::max(worst, std::abs(u[j - 1] - exact));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("evolve: sigma = 0 reproduces the free flow") {
  const RadialGrid g(512, 32.0);
  const ModelParams p{1.5, 0.0};
  const RadialField f = gaussian_field(g, 0.5);
  const Trajectory traj = evolve(f, 1.0, p, 1e-2, 20);
  for (std::size_t m = 0; m < traj.size(); ++m) {
    const RadialField free = free_propagate(f, traj.times[m], p);
    CHECK(l2_distance(traj.states[m], free) / l2_norm(f) < 1e-10);
  }
}

TEST_CASE("evolve: mass conserved, energy drift second order, both signs") {
  const RadialGrid g(512, 24.0);
  const RadialField f = gaussian_field(g, 0.4);
  for (double sigma : {1.0, -1.0}) {
    const ModelParams p{1.5, sigma};
    std::vector<double> drifts;
    for (double dt : {4e-3, 2e-3}) {
      const Trajectory traj = evolve(f, 1.0, p, dt, 1000);
      CHECK(rel_err(traj.mass.back(), traj.mass.front()) < 1e-10);
      drifts.push_back(std::abs(traj.energy.back() - traj.energy.front()) /
                       std::abs(traj.energy.front()));
    }
    const double order = std::log2(drifts[0] / drifts[1]);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
  }
}

TEST_CASE("evolve: gauge covariance") {
  const RadialGrid g(256, 16.0);
  const RadialField f = gaussian_field(g, 0.3);
  const Trajectory base = evolve(f, 0.2, kDefault, 5e-3, 40);

  SUBCASE("multiplication by i commutes bit-exactly") {
    const Trajectory rotated = evolve(scaled(f, cplx(0.0, 1.0)), 0.2, kDefault, 5e-3, 40);
    const RadialField& a = rotated.states.back();
    const RadialField& b = base.states.back();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == cplx(0.0, 1.0) * b[i]);
  }

  SUBCASE("generic phase commutes to rounding") {
    const cplx phase = std::polar(1.0, 0.7);
    const Trajectory rotated = evolve(scaled(f, phase), 0.2, kDefault, 5e-3, 40);
    CHECK(l2_distance(rotated.states.back(), scaled(base.states.back(), phase)) <
          1e-12 * l2_norm(f));
  }
}

TEST_CASE("evolve rejects invalid input") {
  const RadialGrid g(256, 16.0);
  RadialField bad = gaussian_field(g);
  bad[0] = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS((void)evolve(bad, 1.0, kDefault, 1e-2), invalid_input);
  CHECK_THROWS_AS((void)evolve(gaussian_field(g), -1.0, kDefault, 1e-2), invalid_input);
  const ModelParams off{2.5, 1.0};
  CHECK_THROWS_AS((void)evolve(gaussian_field(g), 1.0, off, 1e-2), invalid_input);
}

TEST_CASE("energy: zero field, spectral kinetic oracle, conservation") {
  const RadialGrid g(1024, 24.0);
  CHECK(energy(RadialField(g), kDefault) == 0.0);

  const ModelParams free_p{1.5, 0.0};
  const RadialField f = gaussian_field(g);
  const double kinetic_oracle =
      0.5 / (2.0 * pi * pi) *
      simpson(
          [&](double rho) {
            const double fh = std::pow(2.0 * pi, 1.5) * std::exp(-0.5 * rho * rho);
            return std::pow(rho, free_p.alpha) * rho * rho * fh * fh;
          },
          0.0, 40.0, 40000);
  CHECK(rel_err(energy(f, free_p), kinetic_oracle) < 1e-6);

  const Trajectory traj = evolve(gaussian_field(g, 0.4), 1.0, kDefault, 2e-3, 500);
  CHECK(std::abs(traj.energy.back() - traj.energy.front()) /
            std::abs(traj.energy.front()) <
        1e-5);
}

TEST_CASE("rescale: identity, mass invariance, free-flow commutation, guards") {
  const RadialGrid g(1024, 32.0);
  const RadialField f = gaussian_field(g);

  const RadialField same = rescale(f, 1.0, kDefault);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(same[i] == f[i]);

  for (double lam : {0.5, 2.0}) {
    const RadialField fl = rescale(f, lam, kDefault);
    CHECK(rel_err(l2_norm(fl), l2_norm(f)) < 1e-6);
  }

  // S(t) rescale(f) = rescale(S(lam^alpha t) f): the scaling symmetry of the
  // propagator symbol. A band-limited datum keeps the fractional symbol's
  // origin kink out of play (it generates r^{-(3+alpha)} tails proportional
  // to the spectrum at rho = 0, which the two routes truncate differently).
  const RadialField banded = gaussian_band_profile(g, 2.0, 0.4);
  const double lam = 2.0, t = 0.3;
  const RadialField lhs = free_propagate(rescale(banded, lam, kDefault), t, kDefault);
  const RadialField rhs =
      rescale(free_propagate(banded, std::pow(lam, kDefault.alpha) * t, kDefault),
              lam, kDefault);
  CHECK(l2_distance(lhs, rhs) / l2_norm(banded) < 1e-6);

  // Guards: spectral support too high for lam > 1; physical support too wide
  // for lam < 1.
  const RadialField high = inverse_transform(SpectralField::from_function(
      g, [&](double rho) { return cplx(std::exp(-std::pow(rho - 60.0, 2.0)), 0.0); }));
  CHECK_THROWS_AS((void)rescale(high, 4.0, kDefault), invalid_input);
  const RadialField wide =
      RadialField::from_real(g, [&](double r) { return std::exp(-0.002 * r * r); });
  CHECK_THROWS_AS((void)rescale(wide, 0.25, kDefault), invalid_input);
}

TEST_CASE("rescale_trajectory maps times by lambda^{-alpha}") {
  const RadialGrid g(512, 32.0);
  const Trajectory traj = free_trajectory(gaussian_field(g), 1.0, kDefault, 4);
  const Trajectory scaled_traj = rescale_trajectory(traj, 2.0);
  const double factor = std::pow(2.0, -kDefault.alpha);
  for (std::size_t m = 0; m < traj.size(); ++m) {
    CHECK(scaled_traj.times[m] == doctest::Approx(traj.times[m] * factor));
    CHECK(rel_err(scaled_traj.mass[m], traj.mass[m]) < 1e-6);
  }
}

TEST_CASE("duhamel: trilinear structure") {
  const RadialGrid g(256, 16.0);
  const Trajectory flow = free_trajectory(gaussian_field(g, 0.5), 1.0, kDefault, 32);
  Trajectory zero = flow;
  for (auto& s : zero.states) s = RadialField(g);

  SUBCASE("zero third slot gives zero") {
    const RadialField J = duhamel_J(flow, flow, zero, 1.0, kDefault);
    CHECK(l2_norm(J) == 0.0);
  }
  SUBCASE("J at t = 0 is zero") {
    CHECK(l2_norm(duhamel_J(flow, flow, flow, 0.0, kDefault)) == 0.0);
  }
  SUBCASE("homogeneity |c|^2 c with the conjugate slot") {
    const cplx c(0.6, -0.3);
    Trajectory cu = flow;
    for (auto& s : cu.states) s = scaled(s, c);
    const RadialField Jc = duhamel_J(cu, cu, cu, 1.0, kDefault);
    const RadialField J = duhamel_J(flow, flow, flow, 1.0, kDefault);
    const cplx factor = c * std::conj(c) * c;
    CHECK(l2_distance(Jc, scaled(J, factor)) < 1e-8 * l2_norm(Jc));
  }
  SUBCASE("mesh mismatch is rejected") {
    const Trajectory other = free_trajectory(gaussian_field(g, 0.5), 1.0, kDefault, 16);
    CHECK_THROWS_AS((void)duhamel_J(flow, flow, other, 1.0, kDefault), invalid_input);
    CHECK_THROWS_AS((void)duhamel_J(flow, flow, flow, 0.77, kDefault), invalid_input);
  }
}

TEST_CASE("duhamel: trapezoid quadrature is second order in the mesh") {
  const RadialGrid g(512, 24.0);
  const RadialField phi = gaussian_field(g, 0.3);
  auto J_of = [&](std::size_t mesh) {
    const Trajectory flow = free_trajectory(phi, 1.0, kDefault, mesh);
    return duhamel_J(flow, flow, flow, 1.0, kDefault);
  };
  const RadialField fine = J_of(256);
  const double e_coarse = l2_distance(J_of(32), fine);
  const double e_mid = l2_distance(J_of(64), fine);
  const double order = std::log2(e_coarse / e_mid);
  CHECK(order > 1.7);
  CHECK(order < 2.4);
}

TEST_CASE("picard: sigma = 0 converges immediately") {
  const RadialGrid g(256, 16.0);
  const ModelParams p{1.5, 0.0};
  const PicardResult pr = picard_iterate(gaussian_field(g, 0.3), 1.0, p, 4, 32);
  CHECK(pr.converged);
  CHECK(pr.diffs.size() == 1);
  CHECK(pr.diffs[0] == 0.0);
}

TEST_CASE("picard: small data contracts and matches the splitting integrator") {
  const RadialGrid g(512, 32.0);
  const RadialField phi = gaussian_field(g, 0.0212);  // ||phi|| ~ 0.05
  const PicardResult pr = picard_iterate(phi, 5.0, kDefault, 6, 400);
  REQUIRE(pr.diffs.size() >= 2);
  for (std::size_t k = 0; k + 1 < pr.diffs.size(); ++k)
    CHECK(pr.diffs[k + 1] / pr.diffs[k] < 0.5);
  CHECK_FALSE(pr.diverged);

  const Trajectory ev = evolve(phi, 5.0, kDefault, 2.5e-3, 2000);
  const double diff = l2_distance(pr.last().states.back(), ev.states.back());
  CHECK(diff < 0.05 * pr.diffs.front());

  // Fixed-point self-consistency: u = S(t) phi + i sigma J(u, u, u).
  const Trajectory& u = pr.last();
  const Trajectory J = duhamel_sweep(u, u, u, kDefault);
  double worst = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) {
    RadialField rhs = free_propagate(phi, u.times[m], kDefault);
    axpy(rhs, cplx(0.0, kDefault.sigma), J.states[m]);
    worst = std::max(worst, l2_distance(u.states[m], rhs));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("picard: divergence is detected for large data") {
  const RadialGrid g(256, 16.0);
  const PicardResult pr = picard_iterate(gaussian_field(g, 3.0), 4.0, kDefault, 8, 48);
  CHECK(pr.diverged);
}

TEST_CASE("scattering: free flow has constant pullbacks") {
  const RadialGrid g(256, 32.0);
  const ModelParams p{1.5, 0.0};
  const Trajectory traj = evolve(gaussian_field(g, 0.3), 8.0, p, 2e-2, 100);
  const ScatterRecord rec = scattering_extract(traj, {2.0, 4.0, 8.0});
  for (std::size_t i = 0; i < rec.pullbacks.size(); ++i)
    for (std::size_t j = 0; j < rec.pullbacks.size(); ++j)
      CHECK(rec.distances[i][j] < 1e-10);
}

TEST_CASE("scattering: pullback increments decay for small data") {
  const RadialGrid g(512, 64.0);
  const Trajectory traj = evolve(gaussian_field(g, 0.0212), 16.0, kDefault, 8e-3, 125);
  const ScatterRecord rec = scattering_extract(traj, {4.0, 8.0, 16.0});
  CHECK(rec.distances[0][1] > rec.distances[1][2]);
  // Symmetry and nonnegativity of the record.
  CHECK(rec.distances[0][1] == rec.distances[1][0]);
  CHECK(rec.distances[0][2] >= 0.0);
}

TEST_CASE("local time probe: sigma = 0 passes at the bracket top") {
  const RadialGrid g(512, 32.0);
  const ModelParams p{1.5, 0.0};
  LocalTimeOptions opts;
  opts.bisections = 4;
  const LocalTimeProbe probe = local_time_probe(2.0, DyadicIndex(2), p, g, opts);
  CHECK(probe.found);
  CHECK(probe.bracket_maximal);
  CHECK(probe.t_star == opts.bracket_hi);
}

TEST_CASE("local time datum sits in the prescribed ball") {
  const RadialGrid g(512, 32.0);
  const double r = 2.0;
  const double eta = std::ldexp(1.0, -10);
  const RadialField phi = local_time_datum(r, DyadicIndex(2), g, eta);
  CHECK(rel_err(l2_norm(phi), r) < 0.01);  // bulk dominates the mass
  const SpectralField high = project_gt(forward_transform(phi), DyadicIndex(2));
  CHECK(l2_norm(high) <= eta / r);
}
