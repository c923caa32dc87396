#include "mw/diagnose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mw {

namespace {

std::vector<double> test_values(const SpectralField& residual_field) {
  const auto mask = test_inclusion_mask(residual_field.grid);
  std::vector<double> vals;
  vals.reserve(residual_field.values.size() / 2);
  for (std::size_t i = 0; i < residual_field.values.size(); ++i)
    if (mask[i]) vals.push_back(residual_field.values[i]);
  return vals;
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

double chi2_2_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("chi2_2_quantile: p must be in [0,1)");
  return -2.0 * std::log1p(-p);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

SpectralField residuals(const SpectralField& pergram, const SpectralField& blurred) {
  if (!pergram.grid.same_shape(blurred.grid))
    throw ShapeMismatchError("residuals: periodogram and density grids differ");
  const auto mask = likelihood_inclusion_mask(pergram.grid, true);
  SpectralField out{pergram.grid, std::vector<double>(pergram.values.size(), 0.0)};
  for (std::size_t i = 0; i < pergram.values.size(); ++i) {
    const double s = blurred.values[i];
    if (mask[i] && !(s > 0.0))
      throw NumericalError("residuals: blurred density is not positive at an included wavenumber");
    out.values[i] = s > 0.0 ? pergram.values[i] / s : 0.0;
  }
  return out;
}

ResidualTest residual_test_values(std::span<const double> values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("residual_test: alpha must be in (0,1)");
  const int k = static_cast<int>(values.size());
  if (k < 30) throw InsufficientDataError("residual_test: need at least 30 wavenumbers");
  double mean = 0.0, s2 = 0.0;
  for (double v : values) mean += v;
  mean /= k;
  double var = 0.0;
  for (double v : values) {
    s2 += (v - 1.0) * (v - 1.0);
    var += (v - mean) * (v - mean);
  }
  ResidualTest t;
  t.k_used = k;
  t.mean_x = mean;
  t.var_x = var / (k - 1.0);
  t.s2_x = s2 / k;
  t.z_score = (t.s2_x - 1.0) / std::sqrt(8.0 / k);
  t.p_value = 2.0 * normal_cdf(-std::abs(t.z_score));
  t.rejected = t.p_value < alpha;
  return t;
}

ResidualTest residual_test(const SpectralField& residual_field, double alpha) {
  const auto vals = test_values(residual_field);
  return residual_test_values(vals, alpha);
}

std::vector<std::pair<double, double>> qq_chi2(const SpectralField& residual_field, int n_points) {
  if (n_points < 2) throw DomainError("qq_chi2: need at least 2 points");
  auto vals = test_values(residual_field);
  if (vals.empty()) throw InsufficientDataError("qq_chi2: empty test set");
  for (auto& v : vals) v *= 2.0;
  std::sort(vals.begin(), vals.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double p = (i + 0.5) / n_points;
    out.emplace_back(chi2_2_quantile(p), empirical_quantile(vals, p));
  }
  return out;
}

ResidualReport residual_report(const SpectralField& pergram, const SpectralField& blurred,
                               double alpha, int n_qq, int n_bins) {
  ResidualReport rep;
  rep.residual_field = residuals(pergram, blurred);
  rep.alpha = alpha;
  const ResidualTest t = residual_test(rep.residual_field, alpha);
  rep.mean_x = t.mean_x;
  rep.var_x = t.var_x;
  rep.s2_x = t.s2_x;
  rep.z_score = t.z_score;
  rep.p_value = t.p_value;
  rep.rejected = t.rejected;
  rep.k_used = t.k_used;
  rep.qq = qq_chi2(rep.residual_field, n_qq);

  rep.histogram_upper = chi2_2_quantile(0.999);
  rep.histogram.assign(static_cast<std::size_t>(n_bins), 0);
  const auto vals = test_values(rep.residual_field);
  for (double v : vals) {
    int bin = static_cast<int>(2.0 * v / rep.histogram_upper * n_bins);
    bin = std::clamp(bin, 0, n_bins - 1);
    ++rep.histogram[static_cast<std::size_t>(bin)];
  }
  return rep;
}

}  // namespace mw
