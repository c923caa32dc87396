#ifndef MW_ESTIMATE_HPP
#define MW_ESTIMATE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mw/diagnose.hpp"
#include "mw/grid.hpp"
#include "mw/likelihood.hpp"
#include "mw/uncertainty.hpp"

namespace mw {

struct FitOptions {
  // Nested-model semantics: any parameter may be pinned; a special case pins
  // the smoothness to its value.
  std::optional<double> fixed_variance;
  std::optional<double> fixed_smoothness;
  std::optional<double> fixed_range;
  std::optional<SpecialCase> special_case;

  int max_iterations = 200;
  double gradient_tolerance = 1e-6;  // on the score inf-norm over free parameters
  int restarts = 3;
  std::uint64_t seed = 0;            // perturbs restart starting points
  double smoothness_cap = 1e3;       // optimizer bound; saturation warned past 10
  SpectralConfig spectral;
  double residual_alpha = 0.05;
  bool compute_covariance = true;
  bool compute_diagnostics = true;
  int jobs = 0;                      // for the covariance prediction
};

struct EstimateReport {
  MaternParams params_hat;
  double objective_value = 0.0;
  double score_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  int best_restart = 0;
  Mat3 fisher_matrix = Mat3::zero();
  Mat3 hessian_matrix = Mat3::zero();
  ParamCovariance covariance;
  ResidualReport diagnostics;
  std::vector<std::string> warnings;
};

// Automated start per the estimation recipe: windowed sample variance,
// smoothness 2, range (1/20 pi) sqrt(dy dx ny nx); restarts jitter it
// log-normally (sd 0.2), seeded.
MaternParams initial_guess(const Field& field, const SamplingWindow& window, std::uint64_t seed);

// Maximum-likelihood fit of the blurred Whittle objective by BFGS over the
// log of the free parameters.
EstimateReport fit(const Field& field, const SamplingWindow& window, const FitOptions& options = {});

}  // namespace mw

#endif
