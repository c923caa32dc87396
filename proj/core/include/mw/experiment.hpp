#ifndef MW_EXPERIMENT_HPP
#define MW_EXPERIMENT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "mw/estimate.hpp"
#include "mw/uncertainty.hpp"

namespace mw {

enum class ExperimentKind { GrowingDomain, Infill, FillMissing, Ensemble };

std::string experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_by_name(const std::string& name);

// A simulation-estimation sweep along one grid axis:
//   growing_domain: square grids of trial_axis sizes at the base spacing;
//   infill:         trial_axis sizes densifying the base physical extent;
//   fill_missing:   base grid, trial_axis observed fractions, windows nested
//                   (samples only ever added);
//   ensemble:       a single trial on the base grid.
struct ExperimentPlan {
  ExperimentKind kind = ExperimentKind::Ensemble;
  GridSpec base_grid;
  std::vector<double> trial_axis;
  int n_realizations = 2;
  MaternParams theta0;
  std::string window_pattern = "full";  // ignored by fill_missing (always random)
  std::uint64_t seed = 0;
  int restarts = 2;
  double gradient_tolerance = 1e-6;
  bool demean = false;  // synthetic fields are zero-mean; flip for real-data-like runs
  bool predict = true;  // attach the analytic covariance prediction per trial
  int jobs = 0;
  std::string units;

  void validate() const;
};

struct TrialResult {
  double axis_value = 0.0;
  GridSpec grid;
  double k_sum = 0.0;
  int n_converged = 0;
  std::vector<Vec3> estimates;
  EnsembleStats stats;
  Mat3 predicted_covariance = Mat3::zero();
  Mat3 fisher_inverse = Mat3::zero();
  Mat3 efficiency_matrix = Mat3::zero();
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<TrialResult> trials;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

std::string experiment_plan_to_json(const ExperimentPlan& plan);
ExperimentPlan experiment_plan_from_json(const std::string& text);

// trials.csv, estimates_<i>.csv, and summary.json (which embeds the plan and
// all seeds, so a rerun reproduces the tables bit for bit).
void write_experiment_artifacts(const ExperimentResult& result,
                                const std::filesystem::path& directory);

}  // namespace mw

#endif
