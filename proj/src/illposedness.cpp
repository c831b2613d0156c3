#include "fhartree/illposedness.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "fhartree/norms.hpp"
#include "fhartree/regression.hpp"
#include "fhartree/transform.hpp"

namespace fhartree {

AnnulusDatum build_annulus(double lambda, const RadialGrid& grid) {
  FH_REQUIRE(lambda > 0.0, "build_annulus: lambda must be positive");
  FH_REQUIRE(2.0 * lambda < grid.freq_max() / 2.0,
             "build_annulus: aliasing guard requires 2 lambda < rho_max / 2");
  AnnulusDatum d;
  d.lambda = lambda;
  d.spectral = SpectralField::from_function(grid, [&](double rho) {
    return (rho >= lambda && rho <= 2.0 * lambda) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
  });
  d.field = inverse_transform(d.spectral);
  return d;
}

RadialField first_picard_term(const AnnulusDatum& datum, double t,
                              const ModelParams& params) {
  params.require_dynamics_range();
  FH_REQUIRE(t >= 0.0, "first_picard_term: t must be >= 0");
  if (t == 0.0) return RadialField(datum.field.grid);

  const double la = std::pow(datum.lambda, params.alpha);
  if (t > 0.1 / la)
    std::fprintf(stderr,
                 "first_picard_term: warning: t = %g outside the near-stationary "
                 "regime t <= 0.1 lambda^{-alpha} = %g\n",
                 t, 0.1 / la);

  // lambda^alpha dt <= 0.05, with a floor for the trapezoid in t'.
  const auto n_steps = static_cast<std::size_t>(
      std::max(64.0, std::ceil(t * la / 0.05)));
  const Trajectory flow = free_trajectory(datum.field, t, params, n_steps);
  return duhamel_J(flow, flow, flow, t, params);
}

GrowthRecord growth_experiment(const std::vector<double>& lambdas, double s,
                               const ModelParams& params, double eps,
                               const RadialGrid& grid) {
  FH_REQUIRE(lambdas.size() >= 3, "growth_experiment: need at least 3 lambda points");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    FH_REQUIRE(lambdas[i] > lambdas[i - 1], "growth_experiment: lambdas ascending");
  FH_REQUIRE(eps > 0.0 && eps <= 0.1, "growth_experiment: eps must lie in (0, 0.1]");

  GrowthRecord rec;
  rec.s = s;
  rec.alpha = params.alpha;
  rec.eps = eps;

  for (double lambda : lambdas) {
    const AnnulusDatum datum = build_annulus(lambda, grid);
    const double T = eps * std::pow(lambda, -params.alpha);
    const RadialField Phi = first_picard_term(datum, T, params);

    GrowthRow row;
    row.lambda = lambda;
    row.t_final = T;
    row.norm_phi = sobolev_norm(datum.spectral, s);
    row.norm_big_phi = sobolev_norm(Phi, s);
    row.ratio = row.norm_big_phi / std::pow(row.norm_phi, 3.0);
    rec.rows.push_back(row);
  }

  std::vector<double> ls, np, nP, rt;
  for (const auto& r : rec.rows) {
    ls.push_back(r.lambda);
    np.push_back(r.norm_phi);
    nP.push_back(r.norm_big_phi);
    rt.push_back(r.ratio);
  }
  rec.slope_phi = fit_loglog(ls, np).slope;
  rec.slope_big_phi = fit_loglog(ls, nP).slope;
  rec.slope_ratio = fit_loglog(ls, rt).slope;
  return rec;
}

double max_phase_sample(double lambda, double alpha, std::size_t samples,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(lambda, 2.0 * lambda);

  auto random_in_annulus = [&]() {
    // Uniform direction, radius in [lambda, 2 lambda].
    for (;;) {
      const double x = unit(rng), y = unit(rng), z = unit(rng);
      const double n2 = x * x + y * y + z * z;
      if (n2 > 1e-12 && n2 <= 1.0) {
        const double r = radius(rng) / std::sqrt(n2);
        return std::array<double, 3>{x * r, y * r, z * r};
      }
    }
  };
  auto mag = [](const std::array<double, 3>& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  };

  double worst = 0.0;
  std::size_t accepted = 0;
  while (accepted < samples) {
    const auto eta = random_in_annulus();
    const auto sig = random_in_annulus();
    const auto rem = random_in_annulus();  // xi - eta - sigma, forced into the annulus
    const std::array<double, 3> xi{eta[0] + sig[0] + rem[0], eta[1] + sig[1] + rem[1],
                                   eta[2] + sig[2] + rem[2]};
    const double xi_mag = mag(xi);
    if (xi_mag < lambda || xi_mag > 2.0 * lambda) continue;  // integrand support
    ++accepted;
    const double g = std::pow(xi_mag, alpha) - std::pow(mag(eta), alpha) +
                     std::pow(mag(sig), alpha) - std::pow(mag(rem), alpha);
    worst = std::max(worst, std::abs(g));
  }
  return worst;
}

}  // namespace fhartree
