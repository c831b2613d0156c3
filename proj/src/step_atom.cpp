#include "fhartree/step_atom.hpp"

#include <algorithm>
#include <cmath>

#include "fhartree/littlewood_paley.hpp"
#include "fhartree/norms.hpp"
#include "fhartree/transform.hpp"

namespace fhartree {

SpectralField StepAtom::evaluate_spectral(double t) const {
  validate();
  if (t < knots.front() || t >= knots.back()) return SpectralField(pieces[0].grid);
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
  return free_propagate(pieces[std::min(k, pieces.size() - 1)], t, params);
}

RadialField StepAtom::evaluate(double t) const {
  return inverse_transform(evaluate_spectral(t));
}

double v2_norm_exact(const StepAtom& atom) {
  atom.validate();
  const std::size_t K = atom.piece_count();

  // Pairwise squared L2 distances between levels; index 0 is the zero level,
  // index k = 1..K is phi_k.
  auto level_norm_sq = [&](std::size_t k) {
    const double n = l2_norm(atom.pieces[k - 1]);
    return n * n;
  };
  auto level_dist_sq = [&](std::size_t a, std::size_t b) {
    if (a == b) return 0.0;
    if (a == 0) return level_norm_sq(b);
    if (b == 0) return level_norm_sq(a);
    const double d = l2_distance(atom.pieces[a - 1], atom.pieces[b - 1]);
    return d * d;
  };

  // best[k]: maximal sum over increasing paths 0 -> ... -> k. Answer closes
  // the path back to the zero level (exit jump).
  std::vector<double> best(K + 1, 0.0);
  double answer = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    best[k] = level_dist_sq(0, k);
    for (std::size_t j = 1; j < k; ++j)
      best[k] = std::max(best[k], best[j] + level_dist_sq(j, k));
    answer = std::max(answer, best[k] + level_norm_sq(k));
  }
  return std::sqrt(answer);
}

V2LowerResult v2_norm_lower(const Trajectory& traj, std::size_t budget) {
  FH_REQUIRE(traj.size() >= 1, "v2_norm_lower: empty trajectory");
  const std::size_t M = traj.size();

  // Precompute pullbacks once; levels are 0, w_0, ..., w_{M-1}, 0.
  std::vector<RadialField> w;
  w.reserve(M);
  for (std::size_t m = 0; m < M; ++m)
    w.push_back(free_propagate(traj.states[m], -traj.times[m], traj.params));

  auto dist_sq = [&](long a, long b) {
    // -1 encodes the zero level on either end.
    if (a == b) return 0.0;
    if (a < 0) { std::swap(a, b); }
    if (b < 0) {
      const double n = l2_norm(w[static_cast<std::size_t>(a)]);
      return n * n;
    }
    const double d = l2_distance(w[static_cast<std::size_t>(a)],
                                 w[static_cast<std::size_t>(b)]);
    return d * d;
  };

  V2LowerResult result;
  // Start from the bare enter/exit path through the single best mesh point.
  std::vector<long> path = {-1, -1};
  double value_sq = 0.0;
  std::size_t used = 0;
  bool improved = true;
  std::vector<bool> taken(M, false);

  while (improved) {
    improved = false;
    double best_gain = 1e-12;
    std::size_t best_idx = 0, best_pos = 0;
    for (std::size_t cand = 0; cand < M && used < budget; ++cand) {
      if (taken[cand]) continue;
      // Insert cand between consecutive path entries; keep time order.
      for (std::size_t pos = 0; pos + 1 < path.size(); ++pos) {
        const long a = path[pos], b = path[pos + 1];
        const bool after_a = a < 0 || static_cast<std::size_t>(a) < cand;
        const bool before_b = b < 0 || cand < static_cast<std::size_t>(b);
        if (!(after_a && before_b)) continue;
        ++used;
        const double gain =
            dist_sq(a, static_cast<long>(cand)) + dist_sq(static_cast<long>(cand), b) -
            dist_sq(a, b);
        if (gain > best_gain) {
          best_gain = gain;
          best_idx = cand;
          best_pos = pos;
        }
      }
    }
    if (best_gain > 1e-12) {
      path.insert(path.begin() + static_cast<long>(best_pos) + 1,
                  static_cast<long>(best_idx));
      taken[best_idx] = true;
      value_sq += best_gain;
      improved = true;
    }
    if (used >= budget) {
      result.budget_exhausted = true;
      break;
    }
  }

  result.value = std::sqrt(value_sq);
  for (long idx : path)
    if (idx >= 0) result.partition.push_back(static_cast<std::size_t>(idx));
  return result;
}

StepAtom project(const StepAtom& atom, DyadicIndex lambda) {
  atom.validate();
  StepAtom out = atom;
  for (auto& piece : out.pieces) piece = project(piece, lambda);
  return out;
}

StepAtom add(const StepAtom& a, const StepAtom& b) {
  a.validate();
  b.validate();
  FH_REQUIRE(a.pieces[0].grid == b.pieces[0].grid, "add: atoms on one grid");
  FH_REQUIRE(a.params.alpha == b.params.alpha, "add: atoms share alpha");

  // Merge the two partitions; each refined interval carries the sum of the
  // active pieces (zero outside an atom's support).
  std::vector<double> knots;
  knots.reserve(a.knots.size() + b.knots.size());
  std::merge(a.knots.begin(), a.knots.end(), b.knots.begin(), b.knots.end(),
             std::back_inserter(knots));
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              knots.end());

  auto piece_at = [](const StepAtom& atom, double t) -> SpectralField {
    if (t < atom.knots.front() || t >= atom.knots.back())
      return SpectralField(atom.pieces[0].grid);
    const auto it = std::upper_bound(atom.knots.begin(), atom.knots.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - atom.knots.begin()) - 1;
    return atom.pieces[std::min(k, atom.pieces.size() - 1)];
  };

  StepAtom out;
  out.params = a.params;
  out.knots = knots;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double mid = 0.5 * (knots[i] + knots[i + 1]);
    SpectralField piece = piece_at(a, mid);
    const SpectralField pb = piece_at(b, mid);
    for (std::size_t s = 0; s < piece.size(); ++s) piece[s] += pb[s];
    out.pieces.push_back(std::move(piece));
  }
  return out;
}

StepAtom scale(StepAtom a, cplx c) {
  for (auto& piece : a.pieces)
    for (auto& z : piece.values) z *= c;
  return a;
}

}  // namespace fhartree
