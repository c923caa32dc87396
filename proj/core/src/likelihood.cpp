#include "mw/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mw/fft.hpp"

namespace mw {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

LikelihoodEngine::LikelihoodEngine(SamplingWindow window, SpectralConfig config)
    : window_(std::move(window)), config_(config) {
  window_.validate();
  const GridSpec& g = window_.grid;
  include_ = likelihood_inclusion_mask(g, config_.include_nyquist);
  autocorr_ = window_autocorrelation(window_);
  norm_ = g.dx * g.dy / (kTwoPi * kTwoPi * static_cast<double>(g.nx) * g.ny);

  // Unique lag radii over absolute offsets (ay, ax); when the spacings match,
  // (ay, ax) and (ax, ay) share a radius.
  radius_index_.assign(static_cast<std::size_t>(g.size()), -1);
  std::map<std::pair<long, long>, int> seen;
  const bool square = g.dy == g.dx;
  for (int ay = 0; ay < g.ny; ++ay)
    for (int ax = 0; ax < g.nx; ++ax) {
      long key_y = ay, key_x = ax;
      if (square && key_x < key_y) std::swap(key_y, key_x);
      auto [it, inserted] = seen.try_emplace({key_y, key_x}, static_cast<int>(unique_radii_.size()));
      if (inserted) unique_radii_.push_back(std::hypot(ay * g.dy, ax * g.dx));
      radius_index_[static_cast<std::size_t>(ay * g.nx + ax)] = it->second;
    }
}

SpectralField LikelihoodEngine::periodogram(const Field& field) const {
  const GridSpec& g = window_.grid;
  if (!field.grid.same_shape(g) || field.values.size() != static_cast<std::size_t>(g.size()))
    throw ShapeMismatchError("periodogram: field and window grids differ");
  for (double v : field.values)
    if (!std::isfinite(v)) throw DomainError("periodogram: non-finite field value");

  double mean = 0.0;
  if (config_.demean) {
    double acc = 0.0;
    for (int i = 0; i < g.size(); ++i)
      acc += window_.weights[static_cast<std::size_t>(i)] * field.values[static_cast<std::size_t>(i)];
    mean = acc / window_.k_sum;
  }
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i)
    buf[static_cast<std::size_t>(i)] =
        window_.weights[static_cast<std::size_t>(i)] *
        (field.values[static_cast<std::size_t>(i)] - mean);
  const auto spec = fft::forward2d(g.ny, g.nx, buf);
  SpectralField out{g, std::vector<double>(spec.size())};
  for (std::size_t i = 0; i < spec.size(); ++i) out.values[i] = norm_ * std::norm(spec[i]);
  return out;
}

// Fold W(y) f(y) onto the grid torus and transform: the exact evaluation of
// the blurred sum at the grid wavenumbers with a single ny-by-nx FFT.
SpectralField LikelihoodEngine::blur(const std::vector<double>& lag_values) const {
  const GridSpec& g = window_.grid;
  std::vector<std::complex<double>> folded(static_cast<std::size_t>(g.size()), 0.0);
  for (int ay = 0; ay < g.ny; ++ay)
    for (int ax = 0; ax < g.nx; ++ax) {
      const double c = lag_values[static_cast<std::size_t>(radius_index_[static_cast<std::size_t>(
          ay * g.nx + ax)])];
      folded[static_cast<std::size_t>(ay * g.nx + ax)] += autocorr_.at(ay, ax) * c;
      if (ay > 0)
        folded[static_cast<std::size_t>((g.ny - ay) * g.nx + ax)] += autocorr_.at(-ay, ax) * c;
      if (ax > 0)
        folded[static_cast<std::size_t>(ay * g.nx + (g.nx - ax))] += autocorr_.at(ay, -ax) * c;
      if (ay > 0 && ax > 0)
        folded[static_cast<std::size_t>((g.ny - ay) * g.nx + (g.nx - ax))] +=
            autocorr_.at(-ay, -ax) * c;
    }
  const auto spec = fft::forward2d(g.ny, g.nx, folded);
  SpectralField out{g, std::vector<double>(spec.size())};
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    out.values[i] = norm_ * spec[i].real();
    max_re = std::max(max_re, std::abs(spec[i].real()));
    max_im = std::max(max_im, std::abs(spec[i].imag()));
  }
  if (max_im > 1e-10 * std::max(max_re, 1e-300))
    throw NumericalError("blur: unexpected imaginary residue");
  return out;
}

const LikelihoodEngine::BlurFields& LikelihoodEngine::evaluate(const MaternParams& params,
                                                               bool with_gradient) const {
  params.validate();
  std::lock_guard<std::mutex> lock(cache_mutex_);
  const bool hit = cache_ && cache_->params.variance == params.variance &&
                   cache_->params.smoothness == params.smoothness &&
                   cache_->params.range == params.range &&
                   (!with_gradient || cache_->log_gradient.has_value());
  if (hit) return *cache_;

  const std::size_t n_r = unique_radii_.size();
  std::vector<double> c_values(n_r);
  std::vector<double> g_var, g_nu, g_rho;
  if (with_gradient) {
    g_var.resize(n_r);
    g_nu.resize(n_r);
    g_rho.resize(n_r);
    for (std::size_t i = 0; i < n_r; ++i) {
      const auto s = matern::covariance_with_gradient(params, unique_radii_[i]);
      c_values[i] = s.value;
      g_var[i] = s.gradient[0];
      g_nu[i] = s.gradient[1];
      g_rho[i] = s.gradient[2];
    }
  } else {
    for (std::size_t i = 0; i < n_r; ++i) c_values[i] = matern::covariance(params, unique_radii_[i]);
  }

  BlurFields fields;
  fields.params = params;
  fields.density = blur(c_values);

  double max_s = 0.0;
  for (double v : fields.density.values) max_s = std::max(max_s, v);
  for (double v : fields.density.values)
    if (v < -1e-12 * max_s)
      throw NegativityError("blurred_density: negative value beyond tolerance");
  for (auto& v : fields.density.values) v = std::max(v, 0.0);

  if (with_gradient) {
    GradientField grad{blur(g_var), blur(g_nu), blur(g_rho)};
    // divide by the density pointwise, guarded against underflow
    auto divide = [&](SpectralField& f) {
      for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double s = fields.density.values[i];
        f.values[i] = s > 1e-300 ? f.values[i] / s : 0.0;
      }
    };
    divide(grad.d_variance);
    divide(grad.d_smoothness);
    divide(grad.d_range);
    fields.log_gradient = std::move(grad);
  }
  cache_ = std::move(fields);
  return *cache_;
}

SpectralField LikelihoodEngine::blurred_density(const MaternParams& params) const {
  return evaluate(params, false).density;
}

GradientField LikelihoodEngine::blurred_log_gradient(const MaternParams& params) const {
  return *evaluate(params, true).log_gradient;
}

double LikelihoodEngine::nll(const MaternParams& params, const SpectralField& pergram) const {
  const GridSpec& g = window_.grid;
  if (!pergram.grid.same_shape(g)) throw ShapeMismatchError("whittle_nll: periodogram grid differs");
  const auto& fields = evaluate(params, false);
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    if (!include_[static_cast<std::size_t>(i)]) continue;
    const double s = fields.density.values[static_cast<std::size_t>(i)];
    if (!(s > 0.0) || !std::isfinite(s))
      throw NumericalError("whittle_nll: blurred density underflow at an included wavenumber");
    acc += std::log(s) + pergram.values[static_cast<std::size_t>(i)] / s;
  }
  const double value = acc / window_.k_sum;
  if (!std::isfinite(value)) throw NumericalError("whittle_nll: non-finite objective");
  return value;
}

LikelihoodEngine::Evaluation LikelihoodEngine::nll_and_score(const MaternParams& params,
                                                             const SpectralField& pergram) const {
  const GridSpec& g = window_.grid;
  if (!pergram.grid.same_shape(g)) throw ShapeMismatchError("score: periodogram grid differs");
  const auto& fields = evaluate(params, true);
  const GradientField& m = *fields.log_gradient;
  Evaluation ev;
  for (int i = 0; i < g.size(); ++i) {
    if (!include_[static_cast<std::size_t>(i)]) continue;
    const std::size_t u = static_cast<std::size_t>(i);
    const double s = fields.density.values[u];
    if (!(s > 0.0) || !std::isfinite(s))
      throw NumericalError("score: blurred density underflow at an included wavenumber");
    const double ratio = pergram.values[u] / s;
    ev.nll += std::log(s) + ratio;
    const double one_minus = 1.0 - ratio;
    ev.score[0] += m.d_variance.values[u] * one_minus;
    ev.score[1] += m.d_smoothness.values[u] * one_minus;
    ev.score[2] += m.d_range.values[u] * one_minus;
  }
  const double inv_k = 1.0 / window_.k_sum;
  ev.nll *= inv_k;
  for (auto& v : ev.score) v *= inv_k;
  if (!std::isfinite(ev.nll)) throw NumericalError("score: non-finite objective");
  return ev;
}

Vec3 LikelihoodEngine::score(const MaternParams& params, const SpectralField& pergram) const {
  return nll_and_score(params, pergram).score;
}

Mat3 LikelihoodEngine::fisher(const MaternParams& params) const {
  const auto& fields = evaluate(params, true);
  const GradientField& m = *fields.log_gradient;
  Mat3 f = Mat3::zero();
  const GridSpec& g = window_.grid;
  for (int i = 0; i < g.size(); ++i) {
    if (!include_[static_cast<std::size_t>(i)]) continue;
    const std::size_t u = static_cast<std::size_t>(i);
    const Vec3 mk{m.d_variance.values[u], m.d_smoothness.values[u], m.d_range.values[u]};
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) f(a, b) += mk[static_cast<std::size_t>(a)] * mk[static_cast<std::size_t>(b)];
  }
  const double inv_k = 1.0 / window_.k_sum;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      f(a, b) *= inv_k;
      f(b, a) = f(a, b);
    }
  return f;
}

Mat3 LikelihoodEngine::hessian(const MaternParams& params, const SpectralField& pergram) const {
  const GridSpec& g = window_.grid;
  if (!pergram.grid.same_shape(g)) throw ShapeMismatchError("hessian: periodogram grid differs");
  const GradientField m = blurred_log_gradient(params);
  const SpectralField s_bar = blurred_density(params);

  // dm/dtheta by central differences of the blurred log-gradient fields
  // (relative step 1e-5); the analytic route would need second covariance
  // derivatives the model does not provide.
  std::array<GradientField, 3> dm;
  const Vec3 theta = params.as_vec();
  for (int i = 0; i < 3; ++i) {
    const double h = 1e-5 * theta[static_cast<std::size_t>(i)];
    Vec3 up_v = theta, dn_v = theta;
    up_v[static_cast<std::size_t>(i)] += h;
    dn_v[static_cast<std::size_t>(i)] -= h;
    const GradientField up = blurred_log_gradient(MaternParams::from_vec(up_v));
    const GradientField dn = blurred_log_gradient(MaternParams::from_vec(dn_v));
    GradientField d;
    auto diff = [&](const SpectralField& a, const SpectralField& b) {
      SpectralField out{g, std::vector<double>(a.values.size())};
      for (std::size_t j = 0; j < a.values.size(); ++j)
        out.values[j] = (a.values[j] - b.values[j]) / (2.0 * h);
      return out;
    };
    d.d_variance = diff(up.d_variance, dn.d_variance);
    d.d_smoothness = diff(up.d_smoothness, dn.d_smoothness);
    d.d_range = diff(up.d_range, dn.d_range);
    dm[static_cast<std::size_t>(i)] = std::move(d);
  }

  auto m_at = [](const GradientField& f, int comp, std::size_t u) {
    switch (comp) {
      case 0: return f.d_variance.values[u];
      case 1: return f.d_smoothness.values[u];
      default: return f.d_range.values[u];
    }
  };

  Mat3 h_out = Mat3::zero();
  for (int i = 0; i < g.size(); ++i) {
    if (!include_[static_cast<std::size_t>(i)]) continue;
    const std::size_t u = static_cast<std::size_t>(i);
    if (!(s_bar.values[u] > 0.0))
      throw NumericalError("hessian: blurred density underflow at an included wavenumber");
    const double ratio = pergram.values[u] / s_bar.values[u];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double m_a = m_at(m, a, u);
        const double m_b = m_at(m, b, u);
        const double dm_ab = m_at(dm[static_cast<std::size_t>(a)], b, u);  // d m_b / d theta_a
        h_out(a, b) += dm_ab + (m_a * m_b - dm_ab) * ratio;
      }
  }
  const double inv_k = 1.0 / window_.k_sum;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) h_out(a, b) *= inv_k;
  // symmetrize away the differencing residue
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double sym = 0.5 * (h_out(a, b) + h_out(b, a));
      h_out(a, b) = h_out(b, a) = sym;
    }
  return h_out;
}

SpectralField periodogram(const Field& field, const SamplingWindow& window,
                          const SpectralConfig& config) {
  return LikelihoodEngine(window, config).periodogram(field);
}

SpectralField blurred_density(const MaternParams& params, const SamplingWindow& window) {
  return LikelihoodEngine(window).blurred_density(params);
}

GradientField blurred_log_gradient(const MaternParams& params, const SamplingWindow& window) {
  return LikelihoodEngine(window).blurred_log_gradient(params);
}

double whittle_nll(const MaternParams& params, const SpectralField& pergram,
                   const SamplingWindow& window, const SpectralConfig& config) {
  return LikelihoodEngine(window, config).nll(params, pergram);
}

Vec3 score(const MaternParams& params, const SpectralField& pergram, const SamplingWindow& window,
           const SpectralConfig& config) {
  return LikelihoodEngine(window, config).score(params, pergram);
}

Mat3 fisher_information(const MaternParams& params, const SamplingWindow& window,
                        const SpectralConfig& config) {
  return LikelihoodEngine(window, config).fisher(params);
}

Mat3 hessian(const MaternParams& params, const SpectralField& pergram,
             const SamplingWindow& window, const SpectralConfig& config) {
  return LikelihoodEngine(window, config).hessian(params, pergram);
}

}  // namespace mw
