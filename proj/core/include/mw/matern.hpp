#ifndef MW_MATERN_HPP
#define MW_MATERN_HPP

#include <array>
#include <string>

#include "mw/errors.hpp"
#include "mw/linalg.hpp"

namespace mw {

// theta = [variance, smoothness, range]; the active mask marks which of the
// three are free in a nested fit.
struct MaternParams {
  double variance = 1.0;    // sigma^2, field units squared
  double smoothness = 1.0;  // nu, dimensionless
  double range = 1.0;       // rho, length units
  std::array<bool, 3> active{true, true, true};

  void validate() const;
  Vec3 as_vec() const { return {variance, smoothness, range}; }
  static MaternParams from_vec(const Vec3& v) { return {v[0], v[1], v[2], {true, true, true}}; }
};

enum class SpecialTag {
  VonKarman,           // nu = 1/3
  Exponential,         // nu = 1/2
  Whittle,             // nu = 1
  AR2,                 // nu = 3/2
  AR3,                 // nu = 5/2
  HalfInteger,         // nu = n + 1/2
  SquaredExponential,  // nu -> infinity
  General,
};

struct SpecialCase {
  SpecialTag tag = SpecialTag::General;
  int half_integer_n = 0;  // only read for HalfInteger

  static SpecialCase von_karman() { return {SpecialTag::VonKarman, 0}; }
  static SpecialCase exponential() { return {SpecialTag::Exponential, 0}; }
  static SpecialCase whittle() { return {SpecialTag::Whittle, 0}; }
  static SpecialCase ar2() { return {SpecialTag::AR2, 0}; }
  static SpecialCase ar3() { return {SpecialTag::AR3, 0}; }
  static SpecialCase half_integer(int n) { return {SpecialTag::HalfInteger, n}; }
  static SpecialCase squared_exponential() { return {SpecialTag::SquaredExponential, 0}; }

  bool is_infinite() const { return tag == SpecialTag::SquaredExponential; }
  double smoothness() const;  // infinity for SquaredExponential
  std::string name() const;
};

SpecialCase special_case_by_name(const std::string& name);

namespace matern {

// C_theta(r) for lag distance r >= 0; equals the variance exactly at r = 0.
double covariance(const MaternParams& params, double r);

// S^d_theta(k), isotropic wavenumber k >= 0, dimension d >= 1.
double spectral_density(const MaternParams& params, double k, int dim = 2);

// Closed forms for the fixed-smoothness special cases.
double special_covariance(const SpecialCase& sc, double variance, double range, double r);
double special_spectral_density(const SpecialCase& sc, double variance, double range, double k,
                                int dim = 2);

// (dC/dvariance, dC/dsmoothness, dC/drange); (1, 0, 0) at r = 0.
Vec3 covariance_gradient(const MaternParams& params, double r);

struct CovarianceSample {
  double value = 0.0;
  Vec3 gradient{};
};
// Value and gradient with the shared Bessel work done once.
CovarianceSample covariance_with_gradient(const MaternParams& params, double r);

double covariance_dr(const MaternParams& params, double r);                    // r > 0
double spectral_density_dk(const MaternParams& params, double k, int dim = 2);

// (dS/dvariance, dS/dsmoothness, dS/drange).
Vec3 spectral_gradient(const MaternParams& params, double k, int dim = 2);

// Integral of r C(r) over [0, r_max]; -> variance (pi rho)^2 / 2 as r_max -> inf.
double cumulative_covariance(const MaternParams& params, double r_max);
double total_covariance(const MaternParams& params);

// Lag distance enclosing a fraction alpha of the total cumulative covariance
// (bisection), and the wavenumber / wavelength enclosing the same fraction of
// spectral power (closed form).
double r_alpha(const MaternParams& params, double alpha);
double k_alpha(const MaternParams& params, double alpha);
double lambda_alpha(const MaternParams& params, double alpha);

}  // namespace matern

}  // namespace mw

#endif
