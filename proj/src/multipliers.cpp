#include "fhartree/multipliers.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "fhartree/transform.hpp"

namespace fhartree {

SpectralField apply_fractional_laplacian_power(const SpectralField& F, double beta) {
  FH_REQUIRE(std::isfinite(beta), "apply_fractional_laplacian_power: beta must be finite");
  FH_REQUIRE(F.all_finite(), "apply_fractional_laplacian_power: non-finite input");
  if (beta == 0.0) return F;
  SpectralField out(F.grid);
  const double e = 2.0 * beta;
  for (std::size_t k = 1; k <= F.grid.n_points; ++k)
    out[k - 1] = F[k - 1] * std::pow(F.grid.freq(k), e);
  return out;
}

double riesz_constant(double alpha) {
  FH_REQUIRE(alpha > 0.0 && alpha < 3.0, "riesz_constant: alpha must lie in (0, 3)");
  return std::pow(2.0, 3.0 - alpha) * std::pow(pi, 1.5) *
         std::tgamma((3.0 - alpha) / 2.0) / std::tgamma(alpha / 2.0);
}

namespace {

// Transform of the truncated kernel |x|^{-alpha} 1_{|x| <= r_max}:
//
//   \hat K(rho) = (4 pi / rho) \int_0^{r_max} sin(rho r) r^{1-alpha} dr,
//
// sampled at every grid frequency. Unlike the full-space multiplier
// c(3,alpha) rho^{alpha-3}, the truncated kernel is integrable, so the
// discrete convolution has no zero-mode artifact, and the product
// K_trunc * d equals |x|^{-alpha} * d exactly wherever the ball of radius
// r_max around x covers the support of d. The base integral is one DST of
// r^{1-alpha}; the first few panels are replaced by Gauss quadrature to
// handle the r -> 0 kink.
std::vector<double> build_truncated_kernel(const RadialGrid& g, double alpha) {
  const std::size_t n = g.n_points;
  const std::size_t m = n - 1;
  const double h = g.spacing();

  std::vector<double> samples(m), sums(m);
  for (std::size_t j = 1; j <= m; ++j)
    samples[j - 1] = std::pow(g.radius(j), 1.0 - alpha);
  detail::dst1(samples.data(), sums.data(), m);

  constexpr std::size_t kPanels = 8;
  constexpr std::size_t kGauss = 16;
  static const double gx[kGauss] = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
      -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
      -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
      0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
      0.9894009349916499};
  static const double gw[kGauss] = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
      0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
      0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
      0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
      0.0271524594117541};

  std::vector<double> kernel(n, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    const double rho = g.freq(k);
    double integral = h * sums[k - 1];
    // Replace the trapezoid value of the first panels by Gauss quadrature.
    for (std::size_t j = 1; j <= kPanels; ++j) {
      const double w = (j == kPanels) ? 0.5 : 1.0;
      integral -= w * h * std::sin(rho * g.radius(j)) * samples[j - 1];
    }
    for (std::size_t p = 0; p < kPanels; ++p) {
      const double lo = static_cast<double>(p) * h;
      for (std::size_t q = 0; q < kGauss; ++q) {
        const double r = lo + 0.5 * h * (1.0 + gx[q]);
        integral += 0.5 * h * gw[q] * std::sin(rho * r) * std::pow(r, 1.0 - alpha);
      }
    }
    kernel[k - 1] = 4.0 * pi / rho * integral;
  }
  return kernel;
}

class KernelCache {
 public:
  static const std::vector<double>& get(const RadialGrid& g, double alpha) {
    static KernelCache cache;
    const Key key{g.n_points, g.r_max, alpha};
    std::lock_guard<std::mutex> lock(cache.mutex_);
    auto it = cache.kernels_.find(key);
    if (it == cache.kernels_.end())
      it = cache.kernels_.emplace(key, build_truncated_kernel(g, alpha)).first;
    return it->second;
  }

 private:
  using Key = std::tuple<std::size_t, double, double>;
  std::mutex mutex_;
  std::map<Key, std::vector<double>> kernels_;
};

}  // namespace

RadialField riesz_convolution(const RadialField& density, double alpha) {
  FH_REQUIRE(alpha > 0.0 && alpha < 3.0,
             "riesz_convolution: alpha must lie in (0, 3)");
  FH_REQUIRE(density.all_finite(), "riesz_convolution: non-finite input");
  const RadialGrid& g = density.grid;
  const std::vector<double>& kernel = KernelCache::get(g, alpha);
  SpectralField V = forward_transform(density);
  for (std::size_t k = 1; k <= g.n_points; ++k) V[k - 1] *= kernel[k - 1];
  return inverse_transform(V);
}

}  // namespace fhartree
