#ifndef MW_LIKELIHOOD_HPP
#define MW_LIKELIHOOD_HPP

#include <complex>
#include <cstdint>
#include <mutex>
#include <optional>
#include <vector>

#include "mw/field.hpp"
#include "mw/grid.hpp"
#include "mw/linalg.hpp"
#include "mw/matern.hpp"

namespace mw {

struct SpectralConfig {
  bool demean = true;           // remove the window-weighted sample mean before the DFT
  bool include_nyquist = true;  // Nyquist rows/columns in the likelihood sums (DC never is)
};

// Log-density parameter gradients on the wavenumber grid,
// m_theta(k) = dS/dtheta / S after blurring.
struct GradientField {
  SpectralField d_variance;
  SpectralField d_smoothness;
  SpectralField d_range;
};

// Shared machinery for one sampling window: window autocorrelation, the
// folded lag grid of the exact blurring transform, and the wavenumber
// inclusion mask. Construction is the expensive part; evaluations at
// different parameter values reuse it.
class LikelihoodEngine {
 public:
  explicit LikelihoodEngine(SamplingWindow window, SpectralConfig config = {});

  const SamplingWindow& window() const { return window_; }
  const SpectralConfig& config() const { return config_; }
  const std::vector<std::uint8_t>& inclusion_mask() const { return include_; }

  SpectralField periodogram(const Field& field) const;
  SpectralField blurred_density(const MaternParams& params) const;
  GradientField blurred_log_gradient(const MaternParams& params) const;

  double nll(const MaternParams& params, const SpectralField& pergram) const;
  struct Evaluation {
    double nll = 0.0;
    Vec3 score{};
  };
  Evaluation nll_and_score(const MaternParams& params, const SpectralField& pergram) const;
  Vec3 score(const MaternParams& params, const SpectralField& pergram) const;
  Mat3 fisher(const MaternParams& params) const;
  Mat3 hessian(const MaternParams& params, const SpectralField& pergram) const;

 private:
  struct BlurFields {
    MaternParams params;
    SpectralField density;
    std::optional<GradientField> log_gradient;
  };

  SpectralField blur(const std::vector<double>& lag_values) const;
  const BlurFields& evaluate(const MaternParams& params, bool with_gradient) const;

  SamplingWindow window_;
  SpectralConfig config_;
  std::vector<std::uint8_t> include_;
  LagField autocorr_;
  std::vector<double> unique_radii_;
  std::vector<int> radius_index_;  // per absolute lag (ay, ax)
  double norm_ = 0.0;              // dx dy / ((2 pi)^2 nx ny)

  mutable std::mutex cache_mutex_;
  mutable std::optional<BlurFields> cache_;
};

// One-shot wrappers over a freshly built engine.
SpectralField periodogram(const Field& field, const SamplingWindow& window,
                          const SpectralConfig& config = {});
SpectralField blurred_density(const MaternParams& params, const SamplingWindow& window);
GradientField blurred_log_gradient(const MaternParams& params, const SamplingWindow& window);
double whittle_nll(const MaternParams& params, const SpectralField& pergram,
                   const SamplingWindow& window, const SpectralConfig& config = {});
Vec3 score(const MaternParams& params, const SpectralField& pergram, const SamplingWindow& window,
           const SpectralConfig& config = {});
Mat3 fisher_information(const MaternParams& params, const SamplingWindow& window,
                        const SpectralConfig& config = {});
Mat3 hessian(const MaternParams& params, const SpectralField& pergram,
             const SamplingWindow& window, const SpectralConfig& config = {});

}  // namespace mw

#endif
