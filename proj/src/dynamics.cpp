#include "fhartree/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fhartree/littlewood_paley.hpp"
#include "fhartree/norms.hpp"
#include "fhartree/transform.hpp"

namespace fhartree {

namespace {

std::vector<double> freq_power(const RadialGrid& g, double e) {
  std::vector<double> w(g.n_points);
  for (std::size_t k = 1; k <= g.n_points; ++k) w[k - 1] = std::pow(g.freq(k), e);
  return w;
}

/// In-place spectral phase e^{-i t rho^alpha} given precomputed rho^alpha.
void apply_free_phase(SpectralField& F, double t, const std::vector<double>& rho_alpha) {
  for (std::size_t i = 0; i < F.size(); ++i)
    F[i] *= std::polar(1.0, -t * rho_alpha[i]);
}

void check_shared_mesh(const Trajectory& a, const Trajectory& b, const char* who) {
  FH_REQUIRE(a.times.size() == b.times.size(), std::string(who) + ": mesh mismatch");
  FH_REQUIRE(!a.states.empty() && a.states.front().grid == b.states.front().grid,
             std::string(who) + ": grid mismatch");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    FH_REQUIRE(std::abs(a.times[i] - b.times[i]) <=
                   1e-9 * std::max(1.0, std::abs(a.times[i])),
               std::string(who) + ": mesh mismatch");
}

}  // namespace

std::size_t Trajectory::index_of(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
  throw invalid_input("Trajectory: time " + std::to_string(t) + " not on mesh");
}

SpectralField free_propagate(const SpectralField& F, double t, const ModelParams& p) {
  p.require_dynamics_range();
  FH_REQUIRE(std::isfinite(t), "free_propagate: time must be finite");
  SpectralField out = F;
  const auto rho_alpha = freq_power(F.grid, p.alpha);
  apply_free_phase(out, t, rho_alpha);
  return out;
}

RadialField free_propagate(const RadialField& f, double t, const ModelParams& p) {
  if (t == 0.0) return f;
  return inverse_transform(free_propagate(forward_transform(f), t, p));
}

Trajectory free_trajectory(const RadialField& phi, double T, const ModelParams& p,
                           std::size_t n_steps) {
  p.require_dynamics_range();
  FH_REQUIRE(n_steps >= 1 && T > 0.0, "free_trajectory: need T > 0 and n_steps >= 1");
  const SpectralField Phi = forward_transform(phi);
  const auto rho_alpha = freq_power(phi.grid, p.alpha);

  Trajectory traj;
  traj.params = p;
  traj.dt = T / static_cast<double>(n_steps);
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  for (std::size_t m = 0; m <= n_steps; ++m) {
    const double t = T * static_cast<double>(m) / static_cast<double>(n_steps);
    SpectralField Ft = Phi;
    apply_free_phase(Ft, t, rho_alpha);
    traj.times.push_back(t);
    traj.states.push_back(m == 0 ? phi : inverse_transform(Ft));
    traj.mass.push_back(l2_norm(traj.states.back()));
    traj.energy.push_back(energy(traj.states.back(), p));
  }
  return traj;
}

double energy(const RadialField& f, const ModelParams& p) {
  const RadialGrid& g = f.grid;
  const SpectralField F = forward_transform(f);
  double kinetic = 0.0;
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double rho = g.freq(k);
    const double w = (k == g.n_points) ? 0.5 : 1.0;
    kinetic += w * std::pow(rho, p.alpha) * rho * rho * std::norm(F[k - 1]);
  }
  kinetic *= 0.5 * g.freq_spacing() / (2.0 * pi * pi);

  const RadialField V = riesz_convolution(squared_modulus(f), p.alpha);
  double potential = 0.0;
  for (std::size_t j = 1; j <= g.n_points; ++j) {
    const double r = g.radius(j);
    const double w = (j == g.n_points) ? 0.5 : 1.0;
    potential += w * r * r * V[j - 1].real() * std::norm(f[j - 1]);
  }
  // Quartic coefficient -sigma/4: the Hamiltonian of i d_t u = Lu - sigma V u
  // (the equation rewritten in standard form). The +sigma/4 variant is not a
  // constant of this flow.
  potential *= -0.25 * p.sigma * 4.0 * pi * g.spacing();
  return kinetic + potential;
}

Trajectory evolve(const RadialField& phi, double T, const ModelParams& p, double dt,
                  std::size_t record_stride) {
  p.require_dynamics_range();
  FH_REQUIRE(T > 0.0 && dt > 0.0, "evolve: need T > 0 and dt > 0");
  FH_REQUIRE(record_stride >= 1, "evolve: record_stride must be >= 1");
  FH_REQUIRE(phi.all_finite(), "evolve: non-finite datum");

  const RadialGrid& g = phi.grid;
  const auto rho_alpha = freq_power(g, p.alpha);
  const std::size_t n_steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
  const double step = T / static_cast<double>(n_steps);

  // Accuracy guideline, not a stability bound: both substeps are exact flows.
  if (step * std::pow(g.freq_max(), p.alpha) > 1.0 + 1e-9)
    std::fputs("evolve: warning: dt * rho_max^alpha > 1, splitting error may dominate\n",
               stderr);

  const double initial_norm = l2_norm(phi);
  const double blow_up_limit = 1e3 * std::max(initial_norm, 1e-300);

  auto half_kick = [&](RadialField& u) {
    if (p.sigma == 0.0) return;
    const RadialField V = riesz_convolution(squared_modulus(u), p.alpha);
    const double c = p.sigma * 0.5 * step;
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] *= std::polar(1.0, c * V[i].real());
  };

  Trajectory traj;
  traj.params = p;
  traj.dt = step;
  auto record = [&](double t, const RadialField& u) {
    traj.times.push_back(t);
    traj.states.push_back(u);
    traj.mass.push_back(l2_norm(u));
    traj.energy.push_back(energy(u, p));
  };

  RadialField u = phi;
  record(0.0, u);
  for (std::size_t m = 1; m <= n_steps; ++m) {
    half_kick(u);
    SpectralField U = forward_transform(u);
    apply_free_phase(U, step, rho_alpha);
    u = inverse_transform(U);
    half_kick(u);

    const double nrm = l2_norm(u);
    if (!std::isfinite(nrm) || nrm > blow_up_limit)
      throw numerical_failure("evolve: blow-up detected at t = " +
                              std::to_string(static_cast<double>(m) * step));
    if (m % record_stride == 0 || m == n_steps)
      record(static_cast<double>(m) * step, u);
  }
  return traj;
}

RadialField rescale(const RadialField& f, double lam, const ModelParams& p) {
  (void)p;  // the spatial rescaling is alpha-independent
  FH_REQUIRE(lam > 0.0 && std::isfinite(lam), "rescale: lambda must be positive");
  if (lam == 1.0) return f;
  const RadialGrid& g = f.grid;
  const SpectralField F = forward_transform(f);

  const double total = l2_norm(F);
  if (lam > 1.0) {
    // Result occupies frequencies lam * supp; its top must stay on the grid.
    double tail_sq = 0.0;
    const double cutoff = g.freq_max() / lam;
    for (std::size_t k = 1; k <= g.n_points; ++k)
      if (g.freq(k) > cutoff)
        tail_sq += ((k == g.n_points) ? 0.5 : 1.0) * g.freq(k) * g.freq(k) * std::norm(F[k - 1]);
    tail_sq *= g.freq_spacing() / (2.0 * pi * pi);
    FH_REQUIRE(std::sqrt(tail_sq) <= 1e-8 * total + 1e-300,
               "rescale: spectral support violates the aliasing guard");
  } else {
    // Result occupies radii supp / lam; the input must vanish beyond lam * r_max.
    double tail_sq = 0.0;
    const double cutoff = lam * g.r_max;
    for (std::size_t j = 1; j <= g.n_points; ++j)
      if (g.radius(j) > cutoff)
        tail_sq += ((j == g.n_points) ? 0.5 : 1.0) * g.radius(j) * g.radius(j) * std::norm(f[j - 1]);
    tail_sq *= 4.0 * pi * g.spacing();
    FH_REQUIRE(std::sqrt(tail_sq) <= 1e-8 * total + 1e-300,
               "rescale: physical support violates the grid truncation guard");
  }

  RadialField out(g);
  const double amp = std::pow(lam, 1.5);
  for (std::size_t j = 1; j <= g.n_points; ++j) {
    const double r = lam * g.radius(j);
    out[j - 1] = (r <= g.r_max) ? amp * detail::evaluate_radial(F, r) : cplx(0.0, 0.0);
  }
  return out;
}

Trajectory rescale_trajectory(const Trajectory& traj, double lam) {
  FH_REQUIRE(lam > 0.0, "rescale_trajectory: lambda must be positive");
  Trajectory out;
  out.params = traj.params;
  const double time_factor = std::pow(lam, -traj.params.alpha);
  out.dt = traj.dt * time_factor;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out.times.push_back(traj.times[i] * time_factor);
    out.states.push_back(rescale(traj.states[i], lam, traj.params));
    out.mass.push_back(l2_norm(out.states.back()));
    out.energy.push_back(energy(out.states.back(), out.params));
  }
  return out;
}

namespace {

/// Shared core of duhamel_J / duhamel_sweep: trapezoid accumulation of the
/// zero-time pullbacks S(-t_m) [ (|.|^{-alpha} * (u1 conj u2)) u3 ](t_m).
/// emit(m, A) is called with the accumulated integral for every mesh index.
template <class Emit>
void duhamel_accumulate(const Trajectory& u1, const Trajectory& u2,
                        const Trajectory& u3, const ModelParams& p,
                        std::size_t last_index, Emit&& emit) {
  const RadialGrid& g = u1.states.front().grid;
  const auto rho_alpha = freq_power(g, p.alpha);

  SpectralField acc(g);
  SpectralField prev(g);
  for (std::size_t m = 0; m <= last_index; ++m) {
    const RadialField density = pointwise_product(u1.states[m], conjugate(u2.states[m]));
    const RadialField w = pointwise_product(riesz_convolution(density, p.alpha),
                                            u3.states[m]);
    SpectralField wt = forward_transform(w);
    apply_free_phase(wt, -u1.times[m], rho_alpha);  // pull back to t = 0
    if (m > 0) {
      const double half = 0.5 * (u1.times[m] - u1.times[m - 1]);
      for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += half * (prev[i] + wt[i]);
    }
    prev = std::move(wt);
    emit(m, acc);
  }
}

}  // namespace

RadialField duhamel_J(const Trajectory& u1, const Trajectory& u2, const Trajectory& u3,
                      double t, const ModelParams& p) {
  p.require_dynamics_range();
  check_shared_mesh(u1, u2, "duhamel_J");
  check_shared_mesh(u1, u3, "duhamel_J");
  if (t == 0.0) return RadialField(u1.states.front().grid);
  const std::size_t target = u1.index_of(t);

  const RadialGrid& g = u1.states.front().grid;
  const auto rho_alpha = freq_power(g, p.alpha);
  RadialField out(g);
  duhamel_accumulate(u1, u2, u3, p, target, [&](std::size_t m, const SpectralField& A) {
    if (m == target) {
      SpectralField J = A;
      apply_free_phase(J, u1.times[m], rho_alpha);
      out = inverse_transform(J);
    }
  });
  return out;
}

Trajectory duhamel_sweep(const Trajectory& u1, const Trajectory& u2,
                         const Trajectory& u3, const ModelParams& p) {
  p.require_dynamics_range();
  check_shared_mesh(u1, u2, "duhamel_sweep");
  check_shared_mesh(u1, u3, "duhamel_sweep");
  const RadialGrid& g = u1.states.front().grid;
  const auto rho_alpha = freq_power(g, p.alpha);

  Trajectory out;
  out.params = p;
  out.dt = u1.dt;
  out.times = u1.times;
  out.states.reserve(u1.size());
  duhamel_accumulate(u1, u2, u3, p, u1.size() - 1,
                     [&](std::size_t m, const SpectralField& A) {
                       SpectralField J = A;
                       apply_free_phase(J, u1.times[m], rho_alpha);
                       out.states.push_back(inverse_transform(J));
                     });
  for (const RadialField& s : out.states) {
    out.mass.push_back(l2_norm(s));
    out.energy.push_back(0.0);  // energy of the increment is not meaningful
  }
  return out;
}

PicardResult picard_iterate(const RadialField& phi, double T, const ModelParams& p,
                            std::size_t k_max, std::size_t n_mesh,
                            bool keep_iterates) {
  p.require_dynamics_range();
  FH_REQUIRE(k_max >= 1, "picard_iterate: k_max must be >= 1");

  PicardResult result;
  Trajectory current = free_trajectory(phi, T, p, n_mesh);
  const Trajectory linear = current;  // S(t) phi, reused every iteration
  result.iterates.push_back(current);

  const double floor = 1e-14 * (1.0 + l2_norm(phi));
  std::size_t rises = 0;
  for (std::size_t k = 0; k < k_max; ++k) {
    const Trajectory J = duhamel_sweep(current, current, current, p);
    Trajectory next = linear;
    const cplx pref(0.0, p.sigma);  // +i sigma J per Duhamel
    double d = 0.0;
    for (std::size_t m = 0; m < next.size(); ++m) {
      for (std::size_t i = 0; i < next.states[m].size(); ++i)
        next.states[m][i] += pref * J.states[m][i];
      next.mass[m] = l2_norm(next.states[m]);
      d = std::max(d, l2_distance(next.states[m], current.states[m]));
    }
    result.diffs.push_back(d);

    if (keep_iterates)
      result.iterates.push_back(next);
    else if (result.iterates.size() == 1)
      result.iterates.push_back(std::move(next));
    else
      result.iterates.back() = std::move(next);
    current = result.iterates.back();

    if (d < floor) {
      result.converged = true;
      break;
    }
    const std::size_t nd = result.diffs.size();
    if (nd >= 2 && result.diffs[nd - 1] > result.diffs[nd - 2]) {
      if (++rises >= 2) {
        result.diverged = true;
        break;
      }
    } else {
      rises = 0;
    }
  }
  return result;
}

ScatterRecord scattering_extract(const Trajectory& traj,
                                 const std::vector<double>& probe_times) {
  ScatterRecord rec;
  rec.probe_times = probe_times;
  for (double t : probe_times) {
    const std::size_t m = traj.index_of(t);
    rec.pullbacks.push_back(free_propagate(traj.states[m], -traj.times[m], traj.params));
  }
  const std::size_t n = rec.pullbacks.size();
  rec.distances.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = l2_distance(rec.pullbacks[i], rec.pullbacks[j]);
      rec.distances[i][j] = d;
      rec.distances[j][i] = d;
    }
  return rec;
}

RadialField local_time_datum(double r, DyadicIndex Lambda, const RadialGrid& grid,
                             double eta) {
  FH_REQUIRE(r >= 1.0, "local_time_datum: r must be >= 1");
  const double L = Lambda.value();
  FH_REQUIRE(2.5 * L + L < grid.freq_max(),
             "local_time_datum: tail band exceeds the frequency grid");

  auto gaussian_band = [&](double center, double width) {
    return SpectralField::from_function(grid, [&](double rho) {
      const double y = (rho - center) / width;
      return cplx(std::exp(-y * y), 0.0);
    });
  };
  SpectralField bulk = gaussian_band(0.6 * L, 0.15 * L);
  SpectralField tail = gaussian_band(2.5 * L, 0.2 * L);
  const double bulk_mass = l2_norm(bulk);
  const double tail_mass = l2_norm(tail);
  FH_REQUIRE(bulk_mass > 0.0 && tail_mass > 0.0, "local_time_datum: degenerate bands");

  SpectralField F(grid);
  const double a = r / bulk_mass;
  const double b = 0.5 * eta / (r * tail_mass);
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = a * bulk[i] + b * tail[i];
  return inverse_transform(F);
}

LocalTimeProbe local_time_probe(double r, DyadicIndex Lambda, const ModelParams& p,
                                const RadialGrid& grid, const LocalTimeOptions& opts) {
  p.require_dynamics_range();
  FH_REQUIRE(r >= 1.0, "local_time_probe: r must be >= 1");
  FH_REQUIRE(resolvable_dyadic_range(grid).contains(Lambda),
             "local_time_probe: Lambda outside grid range");

  const RadialField phi = local_time_datum(r, Lambda, grid, opts.eta);
  const double L = Lambda.value();
  const double eps_ball = std::ldexp(1.0, -6) / r;
  const BumpFamily bump;

  auto high_norm = [&](const RadialField& a, const RadialField& b) {
    SpectralField D = forward_transform(difference(a, b));
    for (std::size_t k = 1; k <= grid.n_points; ++k)
      D[k - 1] *= bump.high_pass(grid.freq(k), L);
    return l2_norm(D);
  };

  auto passes = [&](double T) {
    const double phase_rate = std::pow(3.0 * L, p.alpha);
    const std::size_t mesh = std::min<std::size_t>(
        512, std::max<std::size_t>(48, static_cast<std::size_t>(T * phase_rate / 0.1)));
    const PicardResult pr = picard_iterate(phi, T, p, opts.k_max, mesh);
    if (pr.diverged) return false;
    for (std::size_t k = 0; k + 1 < pr.diffs.size(); ++k)
      if (pr.diffs[k + 1] >= opts.contraction_threshold * pr.diffs[k]) return false;
    const Trajectory& u0 = pr.first();
    const Trajectory& uk = pr.last();
    for (std::size_t m = 0; m < uk.size(); ++m)
      if (high_norm(uk.states[m], u0.states[m]) > eps_ball) return false;
    return true;
  };

  LocalTimeProbe probe;
  probe.contraction_threshold = opts.contraction_threshold;
  probe.ball_radius = eps_ball;
  if (passes(opts.bracket_hi)) {
    probe.t_star = opts.bracket_hi;
    probe.found = true;
    probe.bracket_maximal = true;
    return probe;
  }
  if (!passes(opts.bracket_lo)) return probe;  // found = false

  double lo = std::log(opts.bracket_lo), hi = std::log(opts.bracket_hi);
  for (std::size_t i = 0; i < opts.bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    (passes(std::exp(mid)) ? lo : hi) = mid;
  }
  probe.t_star = std::exp(lo);
  probe.found = true;
  return probe;
}

}  // namespace fhartree
