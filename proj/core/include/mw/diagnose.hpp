#ifndef MW_DIAGNOSE_HPP
#define MW_DIAGNOSE_HPP

#include <span>
#include <utility>
#include <vector>

#include "mw/field.hpp"

namespace mw {

// Pointwise spectral residuals X(k) = |H(k)|^2 / S(k); under the null, X is
// chi^2_2 / 2 away from the DC and Nyquist wavenumbers.
SpectralField residuals(const SpectralField& pergram, const SpectralField& blurred);

struct ResidualTest {
  double s2_x = 0.0;     // mean of (X - 1)^2 over the test set
  double z_score = 0.0;  // against the N(1, 8/K) reference law
  double p_value = 1.0;  // two-sided
  bool rejected = false;
  int k_used = 0;
  double mean_x = 0.0;
  double var_x = 0.0;  // unbiased (K - 1 divisor)
};

// Test over the non-redundant wavenumber set: DC and Nyquist dropped, one
// member of each Hermitian pair kept (the mirrored duplicate of a real
// field's periodogram carries no extra information and would double the
// variance of the statistic against its reference law).
ResidualTest residual_test(const SpectralField& residual_field, double alpha);

// Same statistic on a plain sample of residual values (calibration runs).
ResidualTest residual_test_values(std::span<const double> values, double alpha);

// Empirical quantiles of 2X against chi^2_2 quantiles at matched probability
// points.
std::vector<std::pair<double, double>> qq_chi2(const SpectralField& residual_field, int n_points);

struct ResidualReport {
  SpectralField residual_field;
  double alpha = 0.05;
  double mean_x = 0.0;
  double var_x = 0.0;
  double s2_x = 0.0;
  double z_score = 0.0;
  double p_value = 1.0;
  bool rejected = false;
  int k_used = 0;
  std::vector<long> histogram;  // counts of 2X, overflow folded into the last bin
  double histogram_upper = 0.0; // chi^2_2 quantile 0.999
  std::vector<std::pair<double, double>> qq;
};

ResidualReport residual_report(const SpectralField& pergram, const SpectralField& blurred,
                               double alpha, int n_qq = 101, int n_bins = 50);

double chi2_2_quantile(double p);
double normal_cdf(double z);

}  // namespace mw

#endif
