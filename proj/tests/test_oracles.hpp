// Test-only oracles, independent of the library's computational pathways.
#ifndef MW_TEST_ORACLES_HPP
#define MW_TEST_ORACLES_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "mw/grid.hpp"
#include "mw/matern.hpp"

namespace mw_test {

struct BruteCov {
  std::vector<std::complex<double>> a;  // cov{H(k), H*(k')}
  std::vector<std::complex<double>> b;  // cov{H(k), H(k')}
  int n = 0;
};

// Quadruple loop over (x, x') with the window-weighted covariance; the
// covariance values at masked sites may be replaced arbitrarily (they must
// not matter) via `poison_masked`.
inline BruteCov periodogram_cov_brute(const mw::MaternParams& p, const mw::SamplingWindow& w,
                                      bool poison_masked = false) {
  using std::numbers::pi;
  const mw::GridSpec& g = w.grid;
  const int n = g.size();
  BruteCov out;
  out.n = n;
  out.a.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.b.assign(static_cast<std::size_t>(n) * n, 0.0);
  const double q2 = g.dx * g.dy / (4.0 * pi * pi * g.nx * g.ny);
  for (int k = 0; k < n; ++k) {
    const int ky = k / g.nx, kx = k % g.nx;
    for (int kp = 0; kp < n; ++kp) {
      const int kpy = kp / g.nx, kpx = kp % g.nx;
      std::complex<double> acc_a = 0.0, acc_b = 0.0;
      for (int x = 0; x < n; ++x) {
        const int xy = x / g.nx, xx = x % g.nx;
        for (int xp = 0; xp < n; ++xp) {
          const int xpy = xp / g.nx, xpx = xp % g.nx;
          double c = mw::matern::covariance(p, std::hypot((xy - xpy) * g.dy, (xx - xpx) * g.dx));
          if (poison_masked && (w.weights[static_cast<std::size_t>(x)] == 0.0 ||
                                w.weights[static_cast<std::size_t>(xp)] == 0.0))
            c = 1e6;  // must be annihilated by the window factors
          const double ww = w.weights[static_cast<std::size_t>(x)] *
                            w.weights[static_cast<std::size_t>(xp)] * c;
          const double ph_k = -2.0 * pi * (static_cast<double>(ky) * xy / g.ny +
                                           static_cast<double>(kx) * xx / g.nx);
          const double ph_kp = 2.0 * pi * (static_cast<double>(kpy) * xpy / g.ny +
                                           static_cast<double>(kpx) * xpx / g.nx);
          acc_a += ww * std::polar(1.0, ph_k + ph_kp);
          acc_b += ww * std::polar(1.0, ph_k - ph_kp);
        }
      }
      out.a[static_cast<std::size_t>(k) * n + kp] = q2 * acc_a;
      out.b[static_cast<std::size_t>(k) * n + kp] = q2 * acc_b;
    }
  }
  return out;
}

}  // namespace mw_test

#endif
