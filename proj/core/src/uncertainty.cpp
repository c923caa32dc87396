#include "mw/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mw/fft.hpp"
#include "mw/parallel.hpp"

namespace mw {

namespace {

// Applies the stationary covariance operator over the finite grid (linear,
// not circular) through a 2N-sized torus embedding, and forms the windowed
// transform columns A(., k') and B(., k') of the periodogram covariance.
class ScoreCovContext {
 public:
  ScoreCovContext(const MaternParams& params, const SamplingWindow& window,
                  const SpectralConfig& config)
      : engine_(window, config), grid_(window.grid) {
    params.validate();
    py_ = fft::next_pow2(2 * grid_.ny - 1);
    px_ = fft::next_pow2(2 * grid_.nx - 1);
    // covariance spectrum on the embedding torus (minimum-image lags)
    std::vector<std::complex<double>> c(static_cast<std::size_t>(py_) * px_);
    for (int jy = 0; jy < py_; ++jy) {
      const int sy = std::min(jy, py_ - jy);
      for (int jx = 0; jx < px_; ++jx) {
        const int sx = std::min(jx, px_ - jx);
        c[static_cast<std::size_t>(jy * px_ + jx)] =
            matern::covariance(params, std::hypot(sy * grid_.dy, sx * grid_.dx));
      }
    }
    cov_spec_ = fft::forward2d(py_, px_, c);
    density_ = engine_.blurred_density(params);
    norm_ = grid_.dx * grid_.dy /
            (4.0 * std::numbers::pi * std::numbers::pi * static_cast<double>(grid_.nx) * grid_.ny);
  }

  const LikelihoodEngine& engine() const { return engine_; }
  const SpectralField& density() const { return density_; }
  const GridSpec& grid() const { return grid_; }
  double norm() const { return norm_; }

  // t(x) = sum_x' C(x - x') conj(v_{k'}(x')), with v_{k'} = w e^{-i k'.x}.
  std::vector<std::complex<double>> covariance_apply_conj(int kpy, int kpx) const {
    const auto& w = engine_.window().weights;
    std::vector<std::complex<double>> pad(static_cast<std::size_t>(py_) * px_, 0.0);
    for (int iy = 0; iy < grid_.ny; ++iy) {
      const double ay = 2.0 * std::numbers::pi * kpy * iy / grid_.ny;
      for (int ix = 0; ix < grid_.nx; ++ix) {
        const double ax = 2.0 * std::numbers::pi * kpx * ix / grid_.nx;
        const double phase = ay + ax;  // conj(e^{-i k'.x}) = e^{+i k'.x}
        pad[static_cast<std::size_t>(iy * px_ + ix)] =
            w[static_cast<std::size_t>(iy * grid_.nx + ix)] *
            std::complex<double>(std::cos(phase), std::sin(phase));
      }
    }
    auto spec = fft::forward2d(py_, px_, pad);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= cov_spec_[i];
    auto conv = fft::backward2d(py_, px_, spec);
    const double inv = 1.0 / (static_cast<double>(py_) * px_);
    std::vector<std::complex<double>> t(static_cast<std::size_t>(grid_.size()));
    for (int iy = 0; iy < grid_.ny; ++iy)
      for (int ix = 0; ix < grid_.nx; ++ix)
        t[static_cast<std::size_t>(iy * grid_.nx + ix)] =
            conv[static_cast<std::size_t>(iy * px_ + ix)] * inv;
    return t;
  }

  // Column k' of A(k, k') = cov{H(k), H*(k')}; B is read off by reflection,
  // B(k, k') = conj(A(-k, k')).
  std::vector<std::complex<double>> column_transform(int kpy, int kpx) const {
    auto t = covariance_apply_conj(kpy, kpx);
    const auto& w = engine_.window().weights;
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= w[i];
    auto out = fft::forward2d(grid_.ny, grid_.nx, t);
    for (auto& v : out) v *= norm_;
    return out;
  }

  // Pseudo-variance cov{H(k'), H(k')} alone (diagonal mode).
  std::complex<double> pseudo_variance(int kpy, int kpx) const {
    const auto t = covariance_apply_conj(kpy, kpx);
    const auto& w = engine_.window().weights;
    std::complex<double> acc = 0.0;
    for (int iy = 0; iy < grid_.ny; ++iy) {
      const double ay = 2.0 * std::numbers::pi * kpy * iy / grid_.ny;
      for (int ix = 0; ix < grid_.nx; ++ix) {
        const double ax = 2.0 * std::numbers::pi * kpx * ix / grid_.nx;
        // v_{k'} = w e^{-i k'.x}; pseudo-variance is v^T C v = conj(t) . v
        const std::complex<double> v =
            w[static_cast<std::size_t>(iy * grid_.nx + ix)] *
            std::complex<double>(std::cos(ay + ax), -std::sin(ay + ax));
        acc += std::conj(t[static_cast<std::size_t>(iy * grid_.nx + ix)]) * v;
      }
    }
    return acc * norm_;
  }

 private:
  LikelihoodEngine engine_;
  GridSpec grid_;
  int py_ = 0, px_ = 0;
  std::vector<std::complex<double>> cov_spec_;
  SpectralField density_;
  double norm_ = 0.0;
};

std::vector<int> included_indices(const std::vector<std::uint8_t>& mask) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(static_cast<int>(i));
  return idx;
}

struct ActiveSet {
  std::vector<int> idx;
};

ActiveSet active_set(const MaternParams& p) {
  ActiveSet s;
  for (int i = 0; i < 3; ++i)
    if (p.active[static_cast<std::size_t>(i)]) s.idx.push_back(i);
  if (s.idx.empty()) throw DomainError("param_covariance: no active parameters");
  return s;
}

// Inverse and condition number of the active-parameter block.
struct ReducedInverse {
  Mat3 inverse_embedded = Mat3::zero();  // zeros on fixed rows/cols
  double condition = 0.0;
};

ReducedInverse invert_active(const Mat3& m, const ActiveSet& act) {
  const int d = static_cast<int>(act.idx.size());
  ReducedInverse out;
  if (d == 1) {
    const int i = act.idx[0];
    const double v = m(i, i);
    if (v == 0.0 || !std::isfinite(v)) throw SingularFisherError("singular Fisher information");
    out.inverse_embedded(i, i) = 1.0 / v;
    out.condition = 1.0;
    return out;
  }
  if (d == 2) {
    const int i = act.idx[0], j = act.idx[1];
    const double a = m(i, i), b = m(i, j), c = m(j, j);
    const double det = a * c - b * b;
    if (det == 0.0 || !std::isfinite(det)) throw SingularFisherError("singular Fisher information");
    out.inverse_embedded(i, i) = c / det;
    out.inverse_embedded(j, j) = a / det;
    out.inverse_embedded(i, j) = out.inverse_embedded(j, i) = -b / det;
    const double tr = a + c;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double lo = tr / 2.0 - disc, hi = tr / 2.0 + disc;
    out.condition = lo != 0.0 ? std::abs(hi / lo) : std::numeric_limits<double>::infinity();
    return out;
  }
  const double det = mat3_det(m);
  if (det == 0.0 || !std::isfinite(det)) throw SingularFisherError("singular Fisher information");
  out.inverse_embedded = mat3_inverse(m);
  const Vec3 ev = mat3_sym_eigenvalues(m);
  out.condition = ev[0] != 0.0 ? std::abs(ev[2] / ev[0]) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

PeriodogramCovariance periodogram_covariance(const MaternParams& params,
                                             const SamplingWindow& window, PergramCovMode mode,
                                             const UncertaintyOptions& options) {
  window.validate();
  const GridSpec& g = window.grid;
  const int n = g.size();
  ScoreCovContext ctx(params, window, options.spectral);

  PeriodogramCovariance out;
  out.mode = mode;
  out.n = n;
  if (mode == PergramCovMode::Diagonal) {
    out.diagonal = SpectralField{g, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    std::vector<double> pseudo(static_cast<std::size_t>(n), 0.0);
    parallel_for(
        static_cast<std::size_t>(n),
        [&](std::size_t i) {
          const int ky = static_cast<int>(i) / g.nx;
          const int kx = static_cast<int>(i) % g.nx;
          pseudo[i] = std::norm(ctx.pseudo_variance(ky, kx));
        },
        options.jobs);
    for (int i = 0; i < n; ++i) {
      const double s = ctx.density().values[static_cast<std::size_t>(i)];
      out.diagonal.values[static_cast<std::size_t>(i)] = s * s + pseudo[static_cast<std::size_t>(i)];
    }
    return out;
  }

  if (n > options.full_mode_cap)
    throw CapExceededError(
        "periodogram_covariance: grid exceeds the full-mode cap; use Diagonal mode or the "
        "streaming score_covariance");
  out.cov_sq.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.pseudo_sq.assign(static_cast<std::size_t>(n) * n, 0.0);
  parallel_for(
      static_cast<std::size_t>(n),
      [&](std::size_t col) {
        const int ky = static_cast<int>(col) / g.nx;
        const int kx = static_cast<int>(col) % g.nx;
        const auto t = ctx.column_transform(ky, kx);
        for (int row = 0; row < n; ++row) {
          const int ry = row / g.nx, rx = row % g.nx;
          const int nry = (g.ny - ry) % g.ny, nrx = (g.nx - rx) % g.nx;
          out.cov_sq[static_cast<std::size_t>(row) * n + col] =
              std::norm(t[static_cast<std::size_t>(row)]);
          out.pseudo_sq[static_cast<std::size_t>(row) * n + col] =
              std::norm(t[static_cast<std::size_t>(nry * g.nx + nrx)]);
        }
      },
      options.jobs);
  return out;
}

Mat3 score_covariance(const MaternParams& params, const SamplingWindow& window,
                      const UncertaintyOptions& options) {
  window.validate();
  const GridSpec& g = window.grid;
  ScoreCovContext ctx(params, window, options.spectral);
  const auto& mask = ctx.engine().inclusion_mask();
  const auto cols = included_indices(mask);
  const GradientField m_field = ctx.engine().blurred_log_gradient(params);
  const auto& s_bar = ctx.density().values;

  // w_a(k) = m_a(k) / S(k) on the inclusion set
  const std::size_t n = static_cast<std::size_t>(g.size());
  std::array<std::vector<double>, 3> wgt;
  for (auto& v : wgt) v.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (!(s_bar[i] > 0.0))
      throw NumericalError("score_covariance: blurred density underflow at an included wavenumber");
    wgt[0][i] = m_field.d_variance.values[i] / s_bar[i];
    wgt[1][i] = m_field.d_smoothness.values[i] / s_bar[i];
    wgt[2][i] = m_field.d_range.values[i] / s_bar[i];
  }

  // per-column contributions, reduced in fixed order afterwards
  std::vector<std::array<double, 9>> partial(cols.size());
  parallel_for(
      cols.size(),
      [&](std::size_t ci) {
        const int col = cols[ci];
        const int ky = col / g.nx;
        const int kx = col % g.nx;
        const auto t = ctx.column_transform(ky, kx);
        Vec3 s_col{};
        for (std::size_t row = 0; row < n; ++row) {
          if (!mask[row]) continue;
          const int ry = static_cast<int>(row) / g.nx, rx = static_cast<int>(row) % g.nx;
          const std::size_t neg =
              static_cast<std::size_t>(((g.ny - ry) % g.ny) * g.nx + ((g.nx - rx) % g.nx));
          const double p = std::norm(t[row]) + std::norm(t[neg]);
          s_col[0] += wgt[0][row] * p;
          s_col[1] += wgt[1][row] * p;
          s_col[2] += wgt[2][row] * p;
        }
        std::array<double, 9> block{};
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            block[static_cast<std::size_t>(3 * a + b)] =
                s_col[static_cast<std::size_t>(a)] * wgt[static_cast<std::size_t>(b)][static_cast<std::size_t>(col)];
        partial[ci] = block;
      },
      options.jobs);

  Mat3 cov = Mat3::zero();
  for (const auto& block : partial)
    for (int i = 0; i < 9; ++i) cov.m[static_cast<std::size_t>(i)] += block[static_cast<std::size_t>(i)];
  const double inv_k2 = 1.0 / (window.k_sum * window.k_sum);
  for (auto& v : cov.m) v *= inv_k2;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double sym = 0.5 * (cov(a, b) + cov(b, a));
      cov(a, b) = cov(b, a) = sym;
    }
  return cov;
}

ParamCovariance param_covariance(const MaternParams& params, const SamplingWindow& window,
                                 const UncertaintyOptions& options) {
  params.validate();
  const ActiveSet act = active_set(params);
  LikelihoodEngine engine(window, options.spectral);
  const Mat3 f = engine.fisher(params);
  const Mat3 sc = score_covariance(params, window, options);

  const ReducedInverse f_inv = invert_active(f, act);
  ParamCovariance out;
  out.evaluated_at = params;
  out.fisher_condition = f_inv.condition;
  out.fisher_warning = f_inv.condition > 1e12;
  const Mat3 sandwich = mat3_mul(f_inv.inverse_embedded, mat3_mul(sc, f_inv.inverse_embedded));
  // keep only active rows/cols, exactly symmetric
  for (int a : act.idx)
    for (int b : act.idx) out.matrix(a, b) = 0.5 * (sandwich(a, b) + sandwich(b, a));
  out.correlations = Mat3::identity();
  for (int a : act.idx)
    for (int b : act.idx) {
      if (a == b) continue;
      const double denom = std::sqrt(out.matrix(a, a) * out.matrix(b, b));
      out.correlations(a, b) = denom > 0.0 ? out.matrix(a, b) / denom : 0.0;
    }
  return out;
}

EfficiencyReport efficiency(const MaternParams& params, const SamplingWindow& window,
                            const UncertaintyOptions& options) {
  const ActiveSet act = active_set(params);
  LikelihoodEngine engine(window, options.spectral);
  const Mat3 f = engine.fisher(params);
  const ReducedInverse f_inv = invert_active(f, act);
  const ParamCovariance pc = param_covariance(params, window, options);

  EfficiencyReport out;
  // inverse of the total information K * F-bar: the CRLB-style optimistic
  // covariance proxy the sandwich is compared against
  out.fisher_inverse = (1.0 / window.k_sum) * f_inv.inverse_embedded;
  out.covariance = pc.matrix;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double num = out.fisher_inverse(a, b);
      const double den = out.covariance(a, b);
      const double floor = 1e-14 * std::sqrt(std::abs(out.covariance(a, a) * out.covariance(b, b)));
      out.efficiency(a, b) =
          std::abs(den) > floor ? num / den : std::numeric_limits<double>::quiet_NaN();
    }
  return out;
}

EnsembleStats ensemble_stats(std::span<const Vec3> estimates, const MaternParams& truth) {
  if (estimates.size() < 2) throw InsufficientDataError("ensemble_stats: need at least 2 estimates");
  EnsembleStats out;
  out.count = static_cast<int>(estimates.size());
  const double n = static_cast<double>(estimates.size());
  for (const auto& e : estimates)
    for (int i = 0; i < 3; ++i) out.mean[static_cast<std::size_t>(i)] += e[static_cast<std::size_t>(i)] / n;
  const Vec3 truth_v = truth.as_vec();
  for (int i = 0; i < 3; ++i)
    out.bias[static_cast<std::size_t>(i)] =
        out.mean[static_cast<std::size_t>(i)] - truth_v[static_cast<std::size_t>(i)];
  for (const auto& e : estimates)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        out.covariance(a, b) += (e[static_cast<std::size_t>(a)] - out.mean[static_cast<std::size_t>(a)]) *
                                (e[static_cast<std::size_t>(b)] - out.mean[static_cast<std::size_t>(b)]) /
                                (n - 1.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double denom = std::sqrt(out.covariance(a, a) * out.covariance(b, b));
      out.correlations(a, b) = a == b ? 1.0 : (denom > 0.0 ? out.covariance(a, b) / denom : 0.0);
    }
  for (int i = 0; i < 3; ++i)
    out.rmse[static_cast<std::size_t>(i)] = std::sqrt(
        out.covariance(i, i) + out.bias[static_cast<std::size_t>(i)] * out.bias[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace mw
