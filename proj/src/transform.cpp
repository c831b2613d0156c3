#include "fhartree/transform.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace fhartree {
namespace detail {

namespace {
// One FFTW plan per transform length, created lazily under a lock.
// Plans are created with FFTW_UNALIGNED so fftw_execute_r2r may run on
// arbitrary caller buffers; execution itself is thread-safe.
class DstPlanCache {
 public:
  static DstPlanCache& instance() {
    static DstPlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t m) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(m);
    if (it != plans_.end()) return it->second;
    std::vector<double> in(m), out(m);
    fftw_plan p = fftw_plan_r2r_1d(static_cast<int>(m), in.data(), out.data(),
                                   FFTW_RODFT00, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(m, p);
    return p;
  }

 private:
  DstPlanCache() = default;
  ~DstPlanCache() {
    for (auto& [m, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};
}  // namespace

void dst1(const double* in, double* out, std::size_t m) {
  fftw_plan p = DstPlanCache::instance().get(m);
  // FFTW's RODFT00 computes Y_k = 2 sum_j X_j sin(pi (j+1)(k+1)/(m+1)).
  fftw_execute_r2r(p, const_cast<double*>(in), out);
  for (std::size_t i = 0; i < m; ++i) out[i] *= 0.5;
}

cplx evaluate_radial(const SpectralField& F, double r) {
  FH_REQUIRE(r > 0.0, "evaluate_radial: r must be positive");
  const RadialGrid& g = F.grid;
  const double drho = g.freq_spacing();
  cplx acc(0.0, 0.0);
  for (std::size_t k = 1; k <= g.n_points; ++k) {
    const double rho = g.freq(k);
    acc += std::sin(rho * r) * rho * F[k - 1];
  }
  return acc * (drho / (2.0 * pi * pi * r));
}

}  // namespace detail

SpectralField forward_transform(const RadialField& f) {
  FH_REQUIRE(f.all_finite(), "forward_transform: non-finite input sample");
  const RadialGrid& g = f.grid;
  const std::size_t n = g.n_points;
  const std::size_t m = n - 1;
  const double h = g.spacing();

  std::vector<double> re(m), im(m), re_t(m), im_t(m);
  for (std::size_t j = 1; j <= m; ++j) {
    const double r = g.radius(j);
    re[j - 1] = r * f[j - 1].real();
    im[j - 1] = r * f[j - 1].imag();
  }
  detail::dst1(re.data(), re_t.data(), m);
  detail::dst1(im.data(), im_t.data(), m);

  SpectralField out(g);
  for (std::size_t k = 1; k <= m; ++k) {
    const double scale = 4.0 * pi * h / g.freq(k);
    out[k - 1] = cplx(scale * re_t[k - 1], scale * im_t[k - 1]);
  }
  out[n - 1] = cplx(0.0, 0.0);
  return out;
}

RadialField inverse_transform(const SpectralField& F) {
  FH_REQUIRE(F.all_finite(), "inverse_transform: non-finite input sample");
  const RadialGrid& g = F.grid;
  const std::size_t n = g.n_points;
  const std::size_t m = n - 1;
  const double drho = g.freq_spacing();

  std::vector<double> re(m), im(m), re_t(m), im_t(m);
  for (std::size_t k = 1; k <= m; ++k) {
    const double rho = g.freq(k);
    re[k - 1] = rho * F[k - 1].real();
    im[k - 1] = rho * F[k - 1].imag();
  }
  detail::dst1(re.data(), re_t.data(), m);
  detail::dst1(im.data(), im_t.data(), m);

  RadialField out(g);
  for (std::size_t j = 1; j <= m; ++j) {
    const double scale = drho / (2.0 * pi * pi * g.radius(j));
    out[j - 1] = cplx(scale * re_t[j - 1], scale * im_t[j - 1]);
  }
  out[n - 1] = cplx(0.0, 0.0);
  return out;
}

}  // namespace fhartree
