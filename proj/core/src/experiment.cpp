#include "mw/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <json.hpp>

#include "mw/io.hpp"
#include "mw/parallel.hpp"
#include "mw/simulate.hpp"

namespace mw {

namespace {

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return seed + 0x9E3779B97F4A7C15ull * (trial + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::GrowingDomain: return "growing_domain";
    case ExperimentKind::Infill: return "infill";
    case ExperimentKind::FillMissing: return "fill_missing";
    case ExperimentKind::Ensemble: return "ensemble";
  }
  return "ensemble";
}

ExperimentKind experiment_kind_by_name(const std::string& name) {
  if (name == "growing_domain") return ExperimentKind::GrowingDomain;
  if (name == "infill") return ExperimentKind::Infill;
  if (name == "fill_missing") return ExperimentKind::FillMissing;
  if (name == "ensemble") return ExperimentKind::Ensemble;
  throw ValidationError("unknown experiment kind: " + name);
}

void ExperimentPlan::validate() const {
  base_grid.validate();
  theta0.validate();
  if (n_realizations < 2) throw DomainError("experiment: n_realizations must be >= 2");
  if (kind != ExperimentKind::Ensemble) {
    if (trial_axis.empty()) throw DomainError("experiment: trial_axis must be nonempty");
    if (!std::is_sorted(trial_axis.begin(), trial_axis.end()))
      throw DomainError("experiment: trial_axis must be monotone increasing");
  }
}

namespace {

struct TrialSetup {
  GridSpec grid;
  SamplingWindow window;
};

TrialSetup trial_setup(const ExperimentPlan& plan, std::size_t t) {
  const std::uint64_t wseed = trial_seed(plan.seed, t);
  switch (plan.kind) {
    case ExperimentKind::GrowingDomain: {
      const int n = static_cast<int>(plan.trial_axis[t]);
      GridSpec g{n, n, plan.base_grid.dy, plan.base_grid.dx};
      return {g, make_window(g, parse_window_pattern(plan.window_pattern, wseed))};
    }
    case ExperimentKind::Infill: {
      const int n = static_cast<int>(plan.trial_axis[t]);
      const double ly = plan.base_grid.ny * plan.base_grid.dy;
      const double lx = plan.base_grid.nx * plan.base_grid.dx;
      GridSpec g{n, n, ly / n, lx / n};
      return {g, make_window(g, parse_window_pattern(plan.window_pattern, wseed))};
    }
    case ExperimentKind::FillMissing: {
      // nested windows: a single seeded permutation, first fraction observed
      const GridSpec g = plan.base_grid;
      const int n = g.size();
      std::vector<int> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 gen(plan.seed);
      for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(gen() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      }
      const double frac = plan.trial_axis[t];
      if (!(frac > 0.0 && frac <= 1.0))
        throw DomainError("fill_missing: trial_axis entries must be observed fractions in (0,1]");
      const int keep = std::max(1, static_cast<int>(std::lround(frac * n)));
      std::vector<double> w(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < keep; ++i)
        w[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1.0;
      return {g, make_window(g, FromMaskPattern{std::move(w)})};
    }
    case ExperimentKind::Ensemble: {
      const GridSpec g = plan.base_grid;
      return {g, make_window(g, parse_window_pattern(plan.window_pattern, wseed))};
    }
  }
  throw ValidationError("experiment: unknown kind");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  ExperimentResult result;
  result.plan = plan;
  const std::size_t n_trials =
      plan.kind == ExperimentKind::Ensemble ? 1 : plan.trial_axis.size();

  for (std::size_t t = 0; t < n_trials; ++t) {
    TrialSetup setup = trial_setup(plan, t);
    TrialResult trial;
    trial.axis_value = plan.kind == ExperimentKind::Ensemble ? 0.0 : plan.trial_axis[t];
    trial.grid = setup.grid;
    trial.k_sum = setup.window.k_sum;

    const FieldSimulator simulator(plan.theta0, setup.grid);
    const std::uint64_t tseed = trial_seed(plan.seed, t);

    std::vector<Vec3> estimates(static_cast<std::size_t>(plan.n_realizations));
    std::vector<std::uint8_t> converged(static_cast<std::size_t>(plan.n_realizations), 0);
    parallel_for(
        static_cast<std::size_t>(plan.n_realizations),
        [&](std::size_t m) {
          const auto sim = simulator.draw(tseed ^ m);
          FitOptions fopt;
          fopt.restarts = plan.restarts;
          fopt.gradient_tolerance = plan.gradient_tolerance;
          fopt.spectral.demean = plan.demean;
          fopt.seed = tseed ^ m;
          fopt.compute_covariance = false;
          fopt.compute_diagnostics = false;
          const EstimateReport rep = fit(sim.field, setup.window, fopt);
          estimates[m] = rep.params_hat.as_vec();
          converged[m] = rep.converged ? 1 : 0;
        },
        plan.jobs);
    trial.estimates = std::move(estimates);
    trial.n_converged = static_cast<int>(
        std::count(converged.begin(), converged.end(), static_cast<std::uint8_t>(1)));
    trial.stats = ensemble_stats(trial.estimates, plan.theta0);

    if (plan.predict) {
      UncertaintyOptions uopt;
      uopt.jobs = plan.jobs;
      const EfficiencyReport eff = efficiency(plan.theta0, setup.window, uopt);
      trial.predicted_covariance = eff.covariance;
      trial.fisher_inverse = eff.fisher_inverse;
      trial.efficiency_matrix = eff.efficiency;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

std::string experiment_plan_to_json(const ExperimentPlan& plan) {
  nlohmann::json j;
  j["kind"] = experiment_kind_name(plan.kind);
  j["base_grid"] = {{"ny", plan.base_grid.ny},
                    {"nx", plan.base_grid.nx},
                    {"dy", plan.base_grid.dy},
                    {"dx", plan.base_grid.dx}};
  j["trial_axis"] = plan.trial_axis;
  j["n_realizations"] = plan.n_realizations;
  j["theta0"] = {{"variance", plan.theta0.variance},
                 {"smoothness", plan.theta0.smoothness},
                 {"range", plan.theta0.range}};
  j["window_pattern"] = plan.window_pattern;
  j["seed"] = plan.seed;
  j["restarts"] = plan.restarts;
  j["gradient_tolerance"] = plan.gradient_tolerance;
  j["demean"] = plan.demean;
  j["predict"] = plan.predict;
  j["units"] = plan.units;
  return j.dump(2);
}

ExperimentPlan experiment_plan_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ExperimentPlan plan;
    plan.kind = experiment_kind_by_name(j.at("kind").get<std::string>());
    const auto& g = j.at("base_grid");
    plan.base_grid = {g.at("ny").get<int>(), g.at("nx").get<int>(), g.at("dy").get<double>(),
                      g.at("dx").get<double>()};
    plan.trial_axis = j.value("trial_axis", std::vector<double>{});
    plan.n_realizations = j.at("n_realizations").get<int>();
    const auto& th = j.at("theta0");
    plan.theta0.variance = th.at("variance").get<double>();
    plan.theta0.smoothness = th.at("smoothness").get<double>();
    plan.theta0.range = th.at("range").get<double>();
    plan.window_pattern = j.value("window_pattern", std::string("full"));
    plan.seed = j.value("seed", static_cast<std::uint64_t>(0));
    plan.restarts = j.value("restarts", 2);
    plan.gradient_tolerance = j.value("gradient_tolerance", 1e-6);
    plan.demean = j.value("demean", false);
    plan.predict = j.value("predict", true);
    plan.units = j.value("units", std::string{});
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("experiment_plan_from_json: ") + e.what());
  }
}

void write_experiment_artifacts(const ExperimentResult& result,
                                const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);

  std::string csv =
      "axis,ny,nx,dy,dx,K,n_converged,"
      "mean_variance,mean_smoothness,mean_range,"
      "bias_variance,bias_smoothness,bias_range,"
      "var_variance,var_smoothness,var_range,"
      "cov_variance_smoothness,cov_variance_range,cov_smoothness_range,"
      "rmse_variance,rmse_smoothness,rmse_range,"
      "pred_var_variance,pred_var_smoothness,pred_var_range,"
      "pred_cov_variance_smoothness,pred_cov_variance_range,pred_cov_smoothness_range,"
      "eff_variance,eff_smoothness,eff_range\n";
  for (const auto& t : result.trials) {
    const auto& s = t.stats;
    std::vector<double> row = {t.axis_value,
                               static_cast<double>(t.grid.ny),
                               static_cast<double>(t.grid.nx),
                               t.grid.dy,
                               t.grid.dx,
                               t.k_sum,
                               static_cast<double>(t.n_converged),
                               s.mean[0], s.mean[1], s.mean[2],
                               s.bias[0], s.bias[1], s.bias[2],
                               s.covariance(0, 0), s.covariance(1, 1), s.covariance(2, 2),
                               s.covariance(0, 1), s.covariance(0, 2), s.covariance(1, 2),
                               s.rmse[0], s.rmse[1], s.rmse[2],
                               t.predicted_covariance(0, 0), t.predicted_covariance(1, 1),
                               t.predicted_covariance(2, 2),
                               t.predicted_covariance(0, 1), t.predicted_covariance(0, 2),
                               t.predicted_covariance(1, 2),
                               t.efficiency_matrix(0, 0), t.efficiency_matrix(1, 1),
                               t.efficiency_matrix(2, 2)};
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) csv += ',';
      csv += fmt(row[i]);
    }
    csv += '\n';
  }
  write_text(directory / "trials.csv", csv);

  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    std::string est = "variance,smoothness,range\n";
    for (const auto& e : result.trials[t].estimates)
      est += fmt(e[0]) + "," + fmt(e[1]) + "," + fmt(e[2]) + "\n";
    write_text(directory / ("estimates_" + std::to_string(t) + ".csv"), est);
  }

  nlohmann::json j;
  j["plan"] = nlohmann::json::parse(experiment_plan_to_json(result.plan));
  nlohmann::json trials = nlohmann::json::array();
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    const auto& tr = result.trials[t];
    nlohmann::json e;
    e["axis"] = tr.axis_value;
    e["trial_seed"] = trial_seed(result.plan.seed, t);
    e["grid"] = {{"ny", tr.grid.ny}, {"nx", tr.grid.nx}, {"dy", tr.grid.dy}, {"dx", tr.grid.dx}};
    e["K"] = tr.k_sum;
    e["n_converged"] = tr.n_converged;
    e["mean"] = tr.stats.mean;
    e["bias"] = tr.stats.bias;
    e["rmse"] = tr.stats.rmse;
    e["covariance"] = tr.stats.covariance.m;
    e["correlations"] = tr.stats.correlations.m;
    e["predicted_covariance"] = tr.predicted_covariance.m;
    e["fisher_inverse"] = tr.fisher_inverse.m;
    e["efficiency"] = tr.efficiency_matrix.m;
    trials.push_back(e);
  }
  j["trials"] = trials;
  write_text(directory / "summary.json", j.dump(2));
}

}  // namespace mw
