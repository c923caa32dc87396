#ifndef MW_UNCERTAINTY_HPP
#define MW_UNCERTAINTY_HPP

#include <span>
#include <vector>

#include "mw/likelihood.hpp"

namespace mw {

// Sandwich covariance of the parameter estimator, with the correlation
// matrix and the parameters it was evaluated at. Rows/columns of fixed
// parameters are zero; their correlation diagonal is kept at one.
struct ParamCovariance {
  Mat3 matrix = Mat3::zero();
  Mat3 correlations = Mat3::identity();
  MaternParams evaluated_at;
  double fisher_condition = 0.0;
  bool fisher_warning = false;  // condition number beyond 1e12
};

enum class PergramCovMode { Full, Diagonal };

// Fig.-5 style quantities: |cov{H(k),H*(k')}|^2 and |cov{H(k),H(k')}|^2 over
// all wavenumber pairs (Full, n x n each, row-major by flattened k index), or
// just the variance diagonal (Diagonal).
struct PeriodogramCovariance {
  PergramCovMode mode = PergramCovMode::Diagonal;
  int n = 0;
  std::vector<double> cov_sq;     // Full: n*n entries
  std::vector<double> pseudo_sq;  // Full: n*n entries
  SpectralField diagonal;         // Diagonal: cov{|H(k)|^2,|H(k)|^2}
};

struct UncertaintyOptions {
  SpectralConfig spectral;
  int jobs = 0;           // 0 -> hardware/MW_JOBS
  int full_mode_cap = 4096;
};

PeriodogramCovariance periodogram_covariance(const MaternParams& params,
                                             const SamplingWindow& window, PergramCovMode mode,
                                             const UncertaintyOptions& options = {});

// Covariance of the score over all wavenumber pairs, streamed column by
// column via FFT so no n x n matrix is ever materialized.
Mat3 score_covariance(const MaternParams& params, const SamplingWindow& window,
                      const UncertaintyOptions& options = {});

ParamCovariance param_covariance(const MaternParams& params, const SamplingWindow& window,
                                 const UncertaintyOptions& options = {});

// Elementwise ratio of the inverse total Fisher information (the optimistic,
// Cramer-Rao-style uncertainty proxy) to the sandwich covariance, reported
// with both operands. Below one, the Fisher bound is overconfident.
struct EfficiencyReport {
  Mat3 efficiency = Mat3::zero();
  Mat3 fisher_inverse = Mat3::zero();  // (K F)^{-1}
  Mat3 covariance = Mat3::zero();
};

EfficiencyReport efficiency(const MaternParams& params, const SamplingWindow& window,
                            const UncertaintyOptions& options = {});

struct EnsembleStats {
  int count = 0;
  Vec3 mean{};
  Vec3 bias{};
  Vec3 rmse{};
  Mat3 covariance = Mat3::zero();    // unbiased sample covariance
  Mat3 correlations = Mat3::identity();
};

EnsembleStats ensemble_stats(std::span<const Vec3> estimates, const MaternParams& truth);

}  // namespace mw

#endif
