#include "mw/matern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mw/specfun.hpp"

namespace mw {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

void MaternParams::validate() const {
  if (!(std::isfinite(variance) && variance > 0.0))
    throw DomainError("MaternParams: variance must be positive and finite");
  if (!(std::isfinite(smoothness) && smoothness > 0.0))
    throw DomainError("MaternParams: smoothness must be positive and finite");
  if (!(std::isfinite(range) && range > 0.0))
    throw DomainError("MaternParams: range must be positive and finite");
}

double SpecialCase::smoothness() const {
  switch (tag) {
    case SpecialTag::VonKarman: return 1.0 / 3.0;
    case SpecialTag::Exponential: return 0.5;
    case SpecialTag::Whittle: return 1.0;
    case SpecialTag::AR2: return 1.5;
    case SpecialTag::AR3: return 2.5;
    case SpecialTag::HalfInteger: return half_integer_n + 0.5;
    case SpecialTag::SquaredExponential: return kInf;
    case SpecialTag::General: break;
  }
  throw UnsupportedCaseError("SpecialCase::smoothness: General has no fixed smoothness");
}

std::string SpecialCase::name() const {
  switch (tag) {
    case SpecialTag::VonKarman: return "von-karman";
    case SpecialTag::Exponential: return "exponential";
    case SpecialTag::Whittle: return "whittle";
    case SpecialTag::AR2: return "ar2";
    case SpecialTag::AR3: return "ar3";
    case SpecialTag::HalfInteger: return "half-integer(" + std::to_string(half_integer_n) + ")";
    case SpecialTag::SquaredExponential: return "squared-exponential";
    case SpecialTag::General: return "general";
  }
  return "general";
}

SpecialCase special_case_by_name(const std::string& name) {
  if (name == "von-karman" || name == "vonkarman") return SpecialCase::von_karman();
  if (name == "exponential") return SpecialCase::exponential();
  if (name == "whittle") return SpecialCase::whittle();
  if (name == "ar2") return SpecialCase::ar2();
  if (name == "ar3") return SpecialCase::ar3();
  if (name == "squared-exponential" || name == "gaussian") return SpecialCase::squared_exponential();
  if (name.rfind("half-integer:", 0) == 0)
    return SpecialCase::half_integer(std::stoi(name.substr(13)));
  throw ValidationError("unknown special case: " + name);
}

namespace matern {

namespace {

using specfun::bessel_k;
using specfun::digamma;
using specfun::ln_bessel_k;
using specfun::ln_gamma;

void require_lag(double r) {
  if (!std::isfinite(r) || r < 0.0) throw DomainError("matern: lag distance must be finite and >= 0");
}

void require_wavenumber(double k) {
  if (!std::isfinite(k) || k < 0.0) throw DomainError("matern: wavenumber must be finite and >= 0");
}

void require_dim(int dim) {
  if (dim < 1) throw DomainError("matern: dimension must be >= 1");
}

// Bessel argument xi = 2 sqrt(nu) r / (pi rho).
double bessel_arg(const MaternParams& p, double r) {
  return 2.0 * std::sqrt(p.smoothness) * r / (kPi * p.range);
}

// zeta = 4 nu / (pi rho)^2, the squared corner wavenumber of the density.
double corner_sq(const MaternParams& p) {
  return 4.0 * p.smoothness / (kPi * kPi * p.range * p.range);
}

// ln of 2^{1-nu}/Gamma(nu) * xi^nu * K_nu(xi); the covariance is
// variance * exp(...). Log-space keeps large-smoothness models alive.
double ln_covariance_shape(double nu, double xi) {
  return (1.0 - nu) * std::numbers::ln2 - ln_gamma(nu) + nu * std::log(xi) + ln_bessel_k(nu, xi);
}

}  // namespace

double covariance(const MaternParams& params, double r) {
  params.validate();
  require_lag(r);
  if (r == 0.0) return params.variance;
  const double xi = bessel_arg(params, r);
  const double ln_shape = ln_covariance_shape(params.smoothness, xi);
  if (ln_shape < -745.0) return 0.0;
  return params.variance * std::exp(ln_shape);
}

double spectral_density(const MaternParams& params, double k, int dim) {
  params.validate();
  require_wavenumber(k);
  require_dim(dim);
  const double nu = params.smoothness;
  const double d = dim;
  const double zeta = corner_sq(params);
  // nu ln zeta - (nu + d/2) ln(zeta + k^2) = -nu log1p(k^2/zeta) - (d/2) ln(zeta + k^2)
  const double ln_s = std::log(params.variance) + ln_gamma(nu + 0.5 * d) - ln_gamma(nu) -
                      0.5 * d * std::log(kPi) - nu * std::log1p(k * k / zeta) -
                      0.5 * d * std::log(zeta + k * k);
  return std::exp(ln_s);
}

double special_covariance(const SpecialCase& sc, double variance, double range, double r) {
  if (!(variance > 0.0) || !(range > 0.0)) throw DomainError("special_covariance: bad parameters");
  require_lag(r);
  const double q = r / (kPi * range);
  switch (sc.tag) {
    case SpecialTag::VonKarman: {
      if (r == 0.0) return variance;
      const double z = 2.0 * std::sqrt(3.0) / 3.0 * q;
      return variance * std::exp((2.0 / 3.0) * std::numbers::ln2 - ln_gamma(1.0 / 3.0)) *
             std::pow(z, 1.0 / 3.0) * bessel_k(1.0 / 3.0, z);
    }
    case SpecialTag::Exponential:
      return variance * std::exp(-std::sqrt(2.0) * q);
    case SpecialTag::Whittle: {
      if (r == 0.0) return variance;
      const double z = 2.0 * q;
      return variance * z * bessel_k(1.0, z);
    }
    case SpecialTag::AR2: {
      const double z = std::sqrt(6.0) * q;
      return variance * std::exp(-z) * (1.0 + z);
    }
    case SpecialTag::AR3: {
      const double z = std::sqrt(10.0) * q;
      return variance * std::exp(-z) * (1.0 + z + z * z / 3.0);
    }
    case SpecialTag::HalfInteger: {
      const int n = sc.half_integer_n;
      if (n < 0) throw DomainError("special_covariance: half-integer n must be >= 0");
      const double root = std::sqrt(n + 0.5);
      const double z = 4.0 * root * q;
      double sum = 0.0;
      for (int k = n; k >= 0; --k) {
        const double ln_coef = ln_gamma(n + k + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
        sum += std::exp(ln_coef + (n - k) * (r > 0.0 ? std::log(z) : (n - k == 0 ? 0.0 : -kInf)));
      }
      const double ln_front = ln_gamma(n + 1.0) - ln_gamma(2.0 * n + 1.0);
      return variance * std::exp(-2.0 * root * q + ln_front) * sum;
    }
    case SpecialTag::SquaredExponential:
      return variance * std::exp(-q * q);  // exp(-r^2/(pi rho)^2)
    case SpecialTag::General:
      throw UnsupportedCaseError("special_covariance: General is not a closed form");
  }
  throw UnsupportedCaseError("special_covariance: unknown case");
}

double special_spectral_density(const SpecialCase& sc, double variance, double range, double k,
                                int dim) {
  if (!(variance > 0.0) || !(range > 0.0)) throw DomainError("special_spectral_density: bad parameters");
  require_wavenumber(k);
  require_dim(dim);
  const double d = dim;
  const double u = kPi * kPi * range * range * k * k;  // (pi rho k)^2
  const double area = kPi * range * range;             // pi rho^2
  switch (sc.tag) {
    case SpecialTag::VonKarman:
      return variance * std::exp(ln_gamma(1.0 / 3.0 + 0.5 * d) - ln_gamma(1.0 / 3.0)) *
             std::cbrt(4.0) * std::pow(3.0 * area, 0.5 * d) / std::pow(4.0 + 3.0 * u, 1.0 / 3.0 + 0.5 * d);
    case SpecialTag::Exponential:
      return variance * std::exp(ln_gamma(0.5 + 0.5 * d) - 0.5 * std::log(kPi)) * std::sqrt(2.0) *
             std::pow(area, 0.5 * d) / std::pow(2.0 + u, 0.5 * (1.0 + d));
    case SpecialTag::Whittle:
      return variance * std::exp(ln_gamma(1.0 + 0.5 * d)) * 4.0 * std::pow(area, 0.5 * d) /
             std::pow(4.0 + u, 1.0 + 0.5 * d);
    case SpecialTag::AR2:
      return variance * 2.0 * std::exp(ln_gamma(1.5 + 0.5 * d) - 0.5 * std::log(kPi)) * 6.0 *
             std::sqrt(6.0) * std::pow(area, 0.5 * d) / std::pow(6.0 + u, 0.5 * (3.0 + d));
    case SpecialTag::AR3:
      return variance * (4.0 / 3.0) * std::exp(ln_gamma(2.5 + 0.5 * d) - 0.5 * std::log(kPi)) *
             100.0 * std::sqrt(10.0) * std::pow(area, 0.5 * d) / std::pow(10.0 + u, 0.5 * (5.0 + d));
    case SpecialTag::HalfInteger: {
      const int n = sc.half_integer_n;
      if (n < 0) throw DomainError("special_spectral_density: half-integer n must be >= 0");
      const double fourv = 4.0 * (n + 0.5);
      return variance * std::exp(ln_gamma(n + 0.5 * (1.0 + d)) - ln_gamma(n + 0.5)) *
             std::pow(fourv / (fourv + u), n + 0.5) * std::pow(area / (fourv + u), 0.5 * d);
    }
    case SpecialTag::SquaredExponential:
      return variance * std::pow(0.25 * area, 0.5 * d) * std::exp(-0.25 * u);
    case SpecialTag::General:
      throw UnsupportedCaseError("special_spectral_density: General is not a closed form");
  }
  throw UnsupportedCaseError("special_spectral_density: unknown case");
}

namespace {

// nu-derivative by a fourth-order stencil; used inside the guard band around
// nu = 1 where the hypergeometric route cancels catastrophically, and at
// small lags where the analytic bracket nearly cancels.
double covariance_dnu_fd(const MaternParams& params, double r) {
  const double h = 1e-4 * params.smoothness;
  auto at = [&](double nu) {
    MaternParams p = params;
    p.smoothness = nu;
    return covariance(p, r);
  };
  const double nu = params.smoothness;
  return (-at(nu + 2.0 * h) + 8.0 * at(nu + h) - 8.0 * at(nu - h) + at(nu - 2.0 * h)) / (12.0 * h);
}

}  // namespace

CovarianceSample covariance_with_gradient(const MaternParams& params, double r) {
  params.validate();
  require_lag(r);
  CovarianceSample out;
  if (r == 0.0) {
    out.value = params.variance;
    out.gradient = {1.0, 0.0, 0.0};
    return out;
  }
  const double nu = params.smoothness;
  const double xi = bessel_arg(params, r);
  const double ln_shape = ln_covariance_shape(nu, xi);
  if (ln_shape < -700.0) {
    out.value = 0.0;
    out.gradient = {0.0, 0.0, 0.0};
    return out;
  }
  const double shape = std::exp(ln_shape);  // C / variance
  out.value = params.variance * shape;
  out.gradient[0] = shape;

  // dC/drho = variance/rho * 2^{1-nu}/Gamma(nu) xi^{nu+1} K_{nu-1}(xi)
  const double ln_k_nu = ln_bessel_k(nu, xi);
  const double ln_k_nu_m1 = ln_bessel_k(nu - 1.0, xi);
  out.gradient[2] = params.variance / params.range *
                    std::exp(ln_shape + std::log(xi) + ln_k_nu_m1 - ln_k_nu);

  if (std::abs(nu - 1.0) < 1e-3) {
    out.gradient[1] = covariance_dnu_fd(params, r);
    return out;
  }
  // dC/dnu = C * [ (1/2 + ln(xi/2) - psi(nu)) + (dK_nu/dnu)/K_nu
  //               + K'_nu(xi)/K_nu(xi) * dxi/dnu ],  dxi/dnu = xi/(2 nu),
  // with K'_nu(z)/K_nu(z) = -K_{nu-1}/K_nu - nu/z.
  const double dk_order_ratio = specfun::dbessel_k_dorder_ratio(nu, xi);
  const double kprime_ratio = -std::exp(ln_k_nu_m1 - ln_k_nu) - nu / xi;
  const double t_log = 0.5 + std::log(0.5 * xi) - digamma(nu);
  const double t_arg = kprime_ratio * xi / (2.0 * nu);
  const double total_ratio = t_log + dk_order_ratio + t_arg;
  // At small lags the three terms cancel to near zero and amplify the
  // order-derivative's rounding; difference the covariance itself instead.
  const double magnitude = std::abs(t_log) + std::abs(dk_order_ratio) + std::abs(t_arg);
  if (std::abs(total_ratio) * 100.0 < magnitude) {
    out.gradient[1] = covariance_dnu_fd(params, r);
    return out;
  }
  out.gradient[1] = out.value * total_ratio;
  return out;
}

Vec3 covariance_gradient(const MaternParams& params, double r) {
  return covariance_with_gradient(params, r).gradient;
}

double covariance_dr(const MaternParams& params, double r) {
  params.validate();
  if (!std::isfinite(r) || r <= 0.0) throw DomainError("covariance_dr: requires r > 0");
  const double nu = params.smoothness;
  const double xi = bessel_arg(params, r);
  const double ln_shape = ln_covariance_shape(nu, xi);
  if (ln_shape < -700.0) return 0.0;
  const double ln_ratio = std::log(xi) + ln_bessel_k(nu - 1.0, xi) - ln_bessel_k(nu, xi);
  return -params.variance / r * std::exp(ln_shape + ln_ratio);
}

double spectral_density_dk(const MaternParams& params, double k, int dim) {
  params.validate();
  require_wavenumber(k);
  require_dim(dim);
  const double s = spectral_density(params, k, dim);
  const double zeta = corner_sq(params);
  return -2.0 * k * (params.smoothness + 0.5 * dim) * s / (zeta + k * k);
}

Vec3 spectral_gradient(const MaternParams& params, double k, int dim) {
  params.validate();
  require_wavenumber(k);
  require_dim(dim);
  const double nu = params.smoothness;
  const double d = dim;
  const double rho = params.range;
  const double s = spectral_density(params, k, dim);
  const double u = kPi * kPi * rho * rho * k * k;
  const double zeta = corner_sq(params);
  Vec3 g;
  g[0] = s / params.variance;
  g[1] = s * (1.0 + digamma(nu + 0.5 * d) - digamma(nu) - (4.0 * nu + 2.0 * d) / (4.0 * nu + u) -
              std::log1p(u / (4.0 * nu)));
  g[2] = s * (2.0 * nu / rho) * (2.0 * d / (kPi * kPi * rho * rho) - k * k) / (zeta + k * k);
  return g;
}

double cumulative_covariance(const MaternParams& params, double r_max) {
  params.validate();
  require_lag(r_max);
  if (r_max == 0.0) return 0.0;
  const double nu = params.smoothness;
  const double xi = bessel_arg(params, r_max);
  const double total = total_covariance(params);
  // bracket term: 2^{-nu}/Gamma(nu+1) xi^{nu+1} K_{nu+1}(xi)
  const double ln_term = -nu * std::numbers::ln2 - ln_gamma(nu + 1.0) +
                         (nu + 1.0) * std::log(xi) + ln_bessel_k(nu + 1.0, xi);
  const double term = ln_term < -745.0 ? 0.0 : std::exp(ln_term);
  return total * (1.0 - term);
}

double total_covariance(const MaternParams& params) {
  params.validate();
  const double pr = kPi * params.range;
  return 0.5 * params.variance * pr * pr;
}

double r_alpha(const MaternParams& params, double alpha) {
  params.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("r_alpha: alpha must be in (0,1)");
  const double total = total_covariance(params);
  const double target = alpha * total;
  double lo = 0.0;
  double hi = kPi * params.range;
  while (cumulative_covariance(params, hi) < target) {
    hi *= 2.0;
    if (hi > 1e12 * params.range) throw NumericalError("r_alpha: bracket expansion failed");
  }
  const double tol = 1e-10 * total;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double val = cumulative_covariance(params, mid);
    if (std::abs(val - target) <= tol && (hi - lo) <= 1e-12 * hi + 1e-300) return mid;
    (val < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double k_alpha(const MaternParams& params, double alpha) {
  params.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("k_alpha: alpha must be in (0,1)");
  // Cumulative spectral power fraction 1 - (zeta/(zeta+k^2))^nu = alpha.
  const double zeta = corner_sq(params);
  return std::sqrt(zeta * std::expm1(-std::log1p(-alpha) / params.smoothness));
}

double lambda_alpha(const MaternParams& params, double alpha) {
  return 2.0 * kPi / k_alpha(params, alpha);
}

}  // namespace matern

}  // namespace mw
