#include "mw/simulate.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "mw/fft.hpp"
#include "mw/rng.hpp"

namespace mw {

namespace {

// Covariance sampled with torus (minimum-image) distances.
std::vector<double> torus_covariance(const MaternParams& params, const GridSpec& grid, int my,
                                     int mx) {
  std::vector<double> c(static_cast<std::size_t>(my) * mx);
  for (int jy = 0; jy < my; ++jy) {
    const int sy = std::min(jy, my - jy);
    for (int jx = 0; jx < mx; ++jx) {
      const int sx = std::min(jx, mx - jx);
      const double r = std::hypot(sy * grid.dy, sx * grid.dx);
      c[static_cast<std::size_t>(jy * mx + jx)] = matern::covariance(params, r);
    }
  }
  return c;
}

}  // namespace

FieldSimulator::FieldSimulator(const MaternParams& params, const GridSpec& grid,
                               const SimulationOptions& options)
    : params_(params), grid_(grid) {
  params_.validate();
  grid_.validate();
  if (options.embed_factor < 2) throw DomainError("simulate: embed_factor must be >= 2");

  int my = fft::next_pow2(std::max(2 * grid.ny - 1, options.embed_factor * grid.ny));
  int mx = fft::next_pow2(std::max(2 * grid.nx - 1, options.embed_factor * grid.nx));
  const int my_cap = fft::next_pow2(options.max_enlarge_factor * grid.ny);
  const int mx_cap = fft::next_pow2(options.max_enlarge_factor * grid.nx);

  for (;;) {
    const auto c = torus_covariance(params_, grid_, my, mx);
    std::vector<std::complex<double>> cc(c.begin(), c.end());
    const auto eig = fft::forward2d(my, mx, cc);
    double neg_mass = 0.0, abs_mass = 0.0;
    for (const auto& e : eig) {
      const double v = e.real();
      abs_mass += std::abs(v);
      if (v < 0.0) neg_mass += -v;
    }
    const double frac = abs_mass > 0.0 ? neg_mass / abs_mass : 0.0;
    if (frac <= options.clamp_mass_tol) {
      if (frac > 0.0 && !options.clamp_negative_eigs)
        throw EmbeddingError("simulate: embedding not PSD and clamping disabled");
      clamped_mass_ = frac;
      embed_ny_ = my;
      embed_nx_ = mx;
      const double inv_m = 1.0 / (static_cast<double>(my) * mx);
      sqrt_eigs_.resize(eig.size());
      for (std::size_t i = 0; i < eig.size(); ++i)
        sqrt_eigs_[i] = std::sqrt(std::max(0.0, eig[i].real()) * inv_m);
      return;
    }
    if (my >= my_cap && mx >= mx_cap)
      throw EmbeddingError(
          "simulate: embedding stays indefinite up to the size cap; grid too small relative to the "
          "correlation range (negative mass fraction " +
          std::to_string(frac) + ")");
    if (my < my_cap) my *= 2;
    if (mx < mx_cap) mx *= 2;
  }
}

SimulationResult FieldSimulator::draw(std::uint64_t seed) const {
  const int my = embed_ny_, mx = embed_nx_;
  const std::size_t m = static_cast<std::size_t>(my) * mx;
  CounterRng rng(seed);
  std::vector<std::complex<double>> spec(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto [a, b] = rng.gaussian_pair(static_cast<std::uint64_t>(i));
    spec[i] = sqrt_eigs_[i] * std::complex<double>(a, b);
  }
  const auto z = fft::backward2d(my, mx, spec);

  SimulationResult out;
  out.params = params_;
  out.seed = seed;
  out.embed_ny = my;
  out.embed_nx = mx;
  out.clamped_mass_fraction = clamped_mass_;
  out.field.grid = grid_;
  out.companion.grid = grid_;
  out.field.values.resize(static_cast<std::size_t>(grid_.size()));
  out.companion.values.resize(static_cast<std::size_t>(grid_.size()));
  for (int iy = 0; iy < grid_.ny; ++iy)
    for (int ix = 0; ix < grid_.nx; ++ix) {
      const auto v = z[static_cast<std::size_t>(iy * mx + ix)];
      out.field.at(iy, ix) = v.real();
      out.companion.at(iy, ix) = v.imag();
    }
  return out;
}

SimulationResult simulate_field(const MaternParams& params, const GridSpec& grid,
                                std::uint64_t seed, const SimulationOptions& options) {
  return FieldSimulator(params, grid, options).draw(seed);
}

}  // namespace mw
