#ifndef MW_SIMULATE_HPP
#define MW_SIMULATE_HPP

#include <cstdint>

#include "mw/field.hpp"
#include "mw/matern.hpp"

namespace mw {

struct SimulationOptions {
  int embed_factor = 2;               // torus at least embed_factor * n per axis
  bool clamp_negative_eigs = true;    // clamp tiny negative spectral mass
  double clamp_mass_tol = 1e-6;       // largest clampable |negative| mass fraction
  int max_enlarge_factor = 8;         // grow torus up to this multiple before failing
};

struct SimulationResult {
  Field field;      // Re part of the complex embedding draw
  Field companion;  // Im part; independent second realization
  MaternParams params;
  std::uint64_t seed = 0;
  int embed_ny = 0;
  int embed_nx = 0;
  double clamped_mass_fraction = 0.0;
};

// Exact stationary Gaussian simulation by circulant embedding of the Matern
// covariance on an enclosing torus. Reproducible by seed; ensemble members
// can run in parallel because draws are counter-addressed.
SimulationResult simulate_field(const MaternParams& params, const GridSpec& grid,
                                std::uint64_t seed, const SimulationOptions& options = {});

// Same machinery with the embedding eigenvalues computed once and reused
// across draws of an ensemble.
class FieldSimulator {
 public:
  FieldSimulator(const MaternParams& params, const GridSpec& grid,
                 const SimulationOptions& options = {});

  SimulationResult draw(std::uint64_t seed) const;

  int embed_ny() const { return embed_ny_; }
  int embed_nx() const { return embed_nx_; }
  double clamped_mass_fraction() const { return clamped_mass_; }

 private:
  MaternParams params_;
  GridSpec grid_;
  int embed_ny_ = 0;
  int embed_nx_ = 0;
  double clamped_mass_ = 0.0;
  std::vector<double> sqrt_eigs_;  // sqrt(lambda / M)
};

}  // namespace mw

#endif
