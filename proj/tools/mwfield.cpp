// mwfield: simulate, fit, and appraise Matern random fields on sampled grids.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mw/diagnose.hpp"
#include "mw/estimate.hpp"
#include "mw/experiment.hpp"
#include "mw/io.hpp"
#include "mw/likelihood.hpp"
#include "mw/simulate.hpp"
#include "mw/uncertainty.hpp"

namespace {

struct ParamsCli {
  std::string params_file;
  double variance = 0.0;
  double smoothness = 0.0;
  double range = 0.0;

  void add(CLI::App* cmd, bool required) {
    auto* f = cmd->add_option("--params", params_file, "Matern parameters JSON file");
    auto* v = cmd->add_option("--variance", variance, "variance (sigma^2)");
    auto* s = cmd->add_option("--smoothness", smoothness, "smoothness (nu)");
    auto* r = cmd->add_option("--range", range, "range (rho)");
    if (required) {
      v->needs(s)->needs(r);
      f->excludes(v);
    }
  }

  mw::MaternParams resolve() const {
    if (!params_file.empty()) return mw::params_from_json(mw::read_text(params_file));
    mw::MaternParams p{variance, smoothness, range, {true, true, true}};
    p.validate();
    return p;
  }
};

struct WindowCli {
  std::string window_file;
  std::string mask_csv;
  std::string pattern;
  std::uint64_t pattern_seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--window", window_file, "sampling window (MWGRID1 window file)");
    cmd->add_option("--mask-csv", mask_csv, "sampling window as CSV of weights");
    cmd->add_option("--pattern", pattern,
                    "window pattern: full | random:<frac> | checkerboard:<parity>:<period> | "
                    "polygon-interior:<csv> | polygon-exterior:<csv> | tracks:<csv>[:width] | "
                    "mask:<file>");
    cmd->add_option("--pattern-seed", pattern_seed, "seed for random window patterns");
  }

  // grid: shape the pattern applies to (from the data file); file windows
  // carry their own grid and must agree when a data grid is present.
  mw::SamplingWindow resolve(const std::optional<mw::GridSpec>& grid) const {
    if (!window_file.empty()) {
      auto w = mw::window_from_container(mw::read_grid(window_file));
      if (grid && !w.grid.same_shape(*grid))
        throw mw::ShapeMismatchError("window grid does not match the field grid");
      return w;
    }
    if (!mask_csv.empty()) {
      auto w = grid ? mw::read_mask_csv(mask_csv, grid->dy, grid->dx) : mw::read_mask_csv(mask_csv);
      if (grid && !w.grid.same_shape(*grid))
        throw mw::ShapeMismatchError("mask grid does not match the field grid");
      return w;
    }
    if (!grid) throw mw::ValidationError("a grid is required (give --ny/--nx/--dy/--dx or a file)");
    const std::string text = pattern.empty() ? "full" : pattern;
    return mw::make_window(*grid, mw::parse_window_pattern(text, pattern_seed));
  }
};

struct GridCli {
  int ny = 0, nx = 0;
  double dy = 1.0, dx = 1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--ny", ny, "grid rows");
    cmd->add_option("--nx", nx, "grid columns");
    cmd->add_option("--dy", dy, "row spacing (length units)");
    cmd->add_option("--dx", dx, "column spacing (length units)");
  }

  std::optional<mw::GridSpec> resolve() const {
    if (ny <= 0 || nx <= 0) return std::nullopt;
    mw::GridSpec g{ny, nx, dy, dx};
    g.validate();
    return g;
  }
};

mw::SpectralConfig spectral_from_flags(bool no_demean, bool exclude_nyquist) {
  mw::SpectralConfig c;
  c.demean = !no_demean;
  c.include_nyquist = !exclude_nyquist;
  return c;
}

void write_residual_artifacts(const mw::ResidualReport& rep, const std::string& residuals_out,
                              const std::string& hist_csv, const std::string& qq_csv,
                              const std::string& units) {
  if (!residuals_out.empty())
    mw::write_grid(mw::to_container(rep.residual_field, units), residuals_out);
  if (!hist_csv.empty()) {
    std::string csv = "bin_lower,bin_upper,count\n";
    const double width = rep.histogram_upper / static_cast<double>(rep.histogram.size());
    char buf[96];
    for (std::size_t i = 0; i < rep.histogram.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%ld\n", i * width, (i + 1) * width,
                    rep.histogram[i]);
      csv += buf;
    }
    mw::write_text(hist_csv, csv);
  }
  if (!qq_csv.empty()) {
    std::string csv = "theoretical,empirical\n";
    char buf[96];
    for (const auto& [th, em] : rep.qq) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", th, em);
      csv += buf;
    }
    mw::write_text(qq_csv, csv);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Matern covariance estimation for sampled 2-D random fields"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "draw a Gaussian field by circulant embedding");
  ParamsCli sim_params;
  GridCli sim_grid;
  sim_params.add(sim, true);
  sim_grid.add(sim);
  std::uint64_t sim_seed = 0;
  int sim_embed = 2;
  std::string sim_out, sim_companion, sim_units;
  bool sim_no_clamp = false;
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--embed-factor", sim_embed, "minimum torus multiple (>= 2)");
  sim->add_flag("--no-clamp", sim_no_clamp, "fail instead of clamping tiny negative spectral mass");
  sim->add_option("--units", sim_units, "physical units label echoed to outputs");
  sim->add_option("--out", sim_out, "output field (MWGRID1)")->required();
  sim->add_option("--companion-out", sim_companion, "second independent field of the draw");

  // --- fit ---
  auto* fitc = app.add_subcommand("fit", "maximum-likelihood Matern fit");
  std::string fit_field;
  WindowCli fit_window;
  fitc->add_option("--field", fit_field, "observed field (MWGRID1)")->required();
  fit_window.add(fitc);
  std::optional<double> fix_var, fix_nu, fix_rho;
  std::string fit_special;
  fitc->add_option("--fix-variance", fix_var, "hold the variance fixed");
  fitc->add_option("--fix-smoothness", fix_nu, "hold the smoothness fixed");
  fitc->add_option("--fix-range", fix_rho, "hold the range fixed");
  fitc->add_option("--special-case", fit_special,
                   "nested special case fixing the smoothness (von-karman, exponential, whittle, "
                   "ar2, ar3, half-integer:<n>)");
  int fit_restarts = 3, fit_maxiter = 200, fit_jobs = 0;
  double fit_gtol = 1e-6, fit_alpha = 0.05;
  std::uint64_t fit_seed = 0;
  bool fit_no_demean = false, fit_excl_nyq = false, fit_no_cov = false;
  std::string fit_out, fit_resid, fit_hist, fit_qq, fit_units;
  fitc->add_option("--restarts", fit_restarts, "optimizer restarts");
  fitc->add_option("--max-iter", fit_maxiter, "iteration cap per restart");
  fitc->add_option("--gtol", fit_gtol, "score tolerance for convergence");
  fitc->add_option("--seed", fit_seed, "seed for restart jitter");
  fitc->add_option("--alpha", fit_alpha, "residual test level");
  fitc->add_flag("--no-demean", fit_no_demean, "keep the windowed sample mean");
  fitc->add_flag("--exclude-nyquist", fit_excl_nyq, "drop Nyquist wavenumbers from the objective");
  fitc->add_flag("--no-covariance", fit_no_cov, "skip the sandwich covariance prediction");
  fitc->add_option("--jobs", fit_jobs, "worker threads for the covariance prediction");
  fitc->add_option("--units", fit_units, "units label echoed to outputs");
  fitc->add_option("--out", fit_out, "estimate report JSON")->required();
  fitc->add_option("--residuals-out", fit_resid, "residual field (MWGRID1)");
  fitc->add_option("--hist-csv", fit_hist, "residual histogram CSV");
  fitc->add_option("--qq-csv", fit_qq, "residual Q-Q table CSV");

  // --- predict-cov ---
  auto* pcov = app.add_subcommand("predict-cov",
                                  "estimator covariance from the sampling geometry alone");
  ParamsCli pcov_params;
  WindowCli pcov_window;
  GridCli pcov_grid;
  pcov_params.add(pcov, true);
  pcov_window.add(pcov);
  pcov_grid.add(pcov);
  std::string pcov_out;
  int pcov_jobs = 0;
  bool pcov_eff = false;
  bool pcov_hold_var = false, pcov_hold_nu = false, pcov_hold_rho = false;
  pcov->add_option("--jobs", pcov_jobs, "worker threads");
  pcov->add_flag("--efficiency", pcov_eff, "also report inverse Fisher and the efficiency ratio");
  pcov->add_flag("--hold-variance", pcov_hold_var, "treat the variance as fixed (nested model)");
  pcov->add_flag("--hold-smoothness", pcov_hold_nu, "treat the smoothness as fixed");
  pcov->add_flag("--hold-range", pcov_hold_rho, "treat the range as fixed");
  pcov->add_option("--out", pcov_out, "covariance JSON")->required();

  // --- diagnose ---
  auto* diag = app.add_subcommand("diagnose", "spectral residual diagnostics of a given model");
  std::string diag_field;
  ParamsCli diag_params;
  WindowCli diag_window;
  diag->add_option("--field", diag_field, "observed field (MWGRID1)")->required();
  diag_params.add(diag, true);
  diag_window.add(diag);
  double diag_alpha = 0.05;
  bool diag_no_demean = false;
  std::string diag_out, diag_resid, diag_hist, diag_qq, diag_units;
  diag->add_option("--alpha", diag_alpha, "test level");
  diag->add_flag("--no-demean", diag_no_demean, "keep the windowed sample mean");
  diag->add_option("--units", diag_units, "units label echoed to outputs");
  diag->add_option("--out", diag_out, "diagnostics JSON")->required();
  diag->add_option("--residuals-out", diag_resid, "residual field (MWGRID1)");
  diag->add_option("--hist-csv", diag_hist, "histogram CSV");
  diag->add_option("--qq-csv", diag_qq, "Q-Q table CSV");

  // --- window-spectrum ---
  auto* wspec = app.add_subcommand("window-spectrum", "spatial window and |w(k)|^2 tables");
  WindowCli wspec_window;
  GridCli wspec_grid;
  wspec_window.add(wspec);
  wspec_grid.add(wspec);
  int wspec_pad = 2;
  std::string wspec_out, wspec_csv, wspec_units;
  wspec->add_option("--pad", wspec_pad, "zero-padding factor (>= 1)");
  wspec->add_option("--units", wspec_units, "units label echoed to outputs");
  wspec->add_option("--out", wspec_out, "|w(k)|^2 grid (MWGRID1)");
  wspec->add_option("--csv", wspec_csv, "plot-ready table: ky,kx,|w(k)|^2");

  // --- experiment ---
  auto* expc = app.add_subcommand("experiment", "simulation-estimation sweeps");
  std::string exp_plan_file, exp_kind, exp_trials, exp_pattern = "full", exp_outdir;
  ParamsCli exp_params;
  GridCli exp_grid;
  int exp_n = 0, exp_jobs = 0, exp_restarts = 0;
  std::uint64_t exp_seed = 0;
  bool exp_no_predict = false;
  expc->add_option("--plan", exp_plan_file, "experiment plan JSON");
  expc->add_option("--kind", exp_kind, "growing_domain | infill | fill_missing | ensemble");
  expc->add_option("--trials", exp_trials, "comma-separated trial axis (sizes or fractions)");
  exp_params.add(expc, false);
  exp_grid.add(expc);
  expc->add_option("--n", exp_n, "realizations per trial");
  expc->add_option("--window-pattern", exp_pattern, "window pattern per trial");
  expc->add_option("--seed", exp_seed, "master seed");
  expc->add_option("--restarts", exp_restarts, "fit restarts per realization");
  expc->add_option("--jobs", exp_jobs, "worker threads");
  expc->add_flag("--no-predict", exp_no_predict, "skip the analytic covariance per trial");
  expc->add_option("--out-dir", exp_outdir, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // validation errors exit 2
  }

  if (sim->parsed()) {
    const auto grid = sim_grid.resolve();
    if (!grid) throw mw::ValidationError("simulate: --ny and --nx are required");
    mw::SimulationOptions opts;
    opts.embed_factor = sim_embed;
    opts.clamp_negative_eigs = !sim_no_clamp;
    const auto result = mw::simulate_field(sim_params.resolve(), *grid, sim_seed, opts);
    auto container = mw::to_container(result.field, sim_units);
    container.metadata["variance"] = std::to_string(result.params.variance);
    container.metadata["smoothness"] = std::to_string(result.params.smoothness);
    container.metadata["range"] = std::to_string(result.params.range);
    container.metadata["seed"] = std::to_string(result.seed);
    container.metadata["embed_ny"] = std::to_string(result.embed_ny);
    container.metadata["embed_nx"] = std::to_string(result.embed_nx);
    container.metadata["clamped_mass_fraction"] = std::to_string(result.clamped_mass_fraction);
    mw::write_grid(container, sim_out);
    if (!sim_companion.empty()) {
      auto second = mw::to_container(result.companion, sim_units);
      second.metadata = container.metadata;
      second.metadata["member"] = "companion";
      mw::write_grid(second, sim_companion);
    }
    return 0;
  }

  if (fitc->parsed()) {
    const auto field = mw::field_from_container(mw::read_grid(fit_field));
    const auto window = fit_window.resolve(field.grid);
    mw::FitOptions opt;
    opt.fixed_variance = fix_var;
    opt.fixed_smoothness = fix_nu;
    opt.fixed_range = fix_rho;
    if (!fit_special.empty()) opt.special_case = mw::special_case_by_name(fit_special);
    opt.restarts = fit_restarts;
    opt.max_iterations = fit_maxiter;
    opt.gradient_tolerance = fit_gtol;
    opt.seed = fit_seed;
    opt.residual_alpha = fit_alpha;
    opt.spectral = spectral_from_flags(fit_no_demean, fit_excl_nyq);
    opt.compute_covariance = !fit_no_cov;
    opt.jobs = fit_jobs;
    const auto report = mw::fit(field, window, opt);
    mw::write_text(fit_out, mw::estimate_report_to_json(report));
    write_residual_artifacts(report.diagnostics, fit_resid, fit_hist, fit_qq, fit_units);
    return 0;
  }

  if (pcov->parsed()) {
    const auto window = pcov_window.resolve(pcov_grid.resolve());
    mw::UncertaintyOptions uopt;
    uopt.jobs = pcov_jobs;
    auto params = pcov_params.resolve();
    params.active = {!pcov_hold_var, !pcov_hold_nu, !pcov_hold_rho};
    if (pcov_eff) {
      const auto eff = mw::efficiency(params, window, uopt);
      const auto pc = mw::param_covariance(params, window, uopt);
      std::string json = "{\n  \"covariance\": " + mw::param_covariance_to_json(pc) +
                         ",\n  \"fisher_inverse\": " + mw::matrix_to_json(eff.fisher_inverse) +
                         ",\n  \"efficiency\": " + mw::matrix_to_json(eff.efficiency) + "\n}\n";
      mw::write_text(pcov_out, json);
    } else {
      mw::write_text(pcov_out, mw::param_covariance_to_json(mw::param_covariance(params, window, uopt)));
    }
    return 0;
  }

  if (diag->parsed()) {
    const auto field = mw::field_from_container(mw::read_grid(diag_field));
    const auto window = diag_window.resolve(field.grid);
    const auto params = diag_params.resolve();
    mw::SpectralConfig cfg = spectral_from_flags(diag_no_demean, false);
    mw::LikelihoodEngine engine(window, cfg);
    const auto pergram = engine.periodogram(field);
    const auto rep = mw::residual_report(pergram, engine.blurred_density(params), diag_alpha);
    {
      std::string json = "{\n";
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "  \"s2_x\": %.17g,\n  \"z_score\": %.17g,\n  \"p_value\": %.17g,\n"
                    "  \"rejected\": %s,\n  \"k_used\": %d,\n  \"mean_x\": %.17g,\n"
                    "  \"var_x\": %.17g,\n  \"alpha\": %.17g\n}\n",
                    rep.s2_x, rep.z_score, rep.p_value, rep.rejected ? "true" : "false", rep.k_used,
                    rep.mean_x, rep.var_x, rep.alpha);
      json += buf;
      mw::write_text(diag_out, json);
    }
    write_residual_artifacts(rep, diag_resid, diag_hist, diag_qq, diag_units);
    return 0;
  }

  if (wspec->parsed()) {
    const auto window = wspec_window.resolve(wspec_grid.resolve());
    const auto spec = mw::spectral_window(window, wspec_pad);
    if (!wspec_out.empty()) mw::write_grid(mw::to_container(spec, wspec_units), wspec_out);
    if (!wspec_csv.empty()) {
      std::string csv = "ky,kx,power\n";
      char buf[128];
      for (int iy = 0; iy < spec.grid.ny; ++iy)
        for (int ix = 0; ix < spec.grid.nx; ++ix) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", mw::wavenumber_y(spec.grid, iy),
                        mw::wavenumber_x(spec.grid, ix), spec.at(iy, ix));
          csv += buf;
        }
      mw::write_text(wspec_csv, csv);
    }
    if (wspec_out.empty() && wspec_csv.empty())
      throw mw::ValidationError("window-spectrum: give --out and/or --csv");
    return 0;
  }

  if (expc->parsed()) {
    mw::ExperimentPlan plan;
    if (!exp_plan_file.empty()) {
      plan = mw::experiment_plan_from_json(mw::read_text(exp_plan_file));
    } else {
      if (exp_kind.empty() || exp_trials.empty() || exp_n <= 0)
        throw mw::ValidationError("experiment: give --plan or (--kind, --trials, --n, parameters)");
      plan.kind = mw::experiment_kind_by_name(exp_kind);
      std::stringstream ss(exp_trials);
      std::string tok;
      while (std::getline(ss, tok, ',')) plan.trial_axis.push_back(std::stod(tok));
      const auto grid = exp_grid.resolve();
      if (!grid) throw mw::ValidationError("experiment: --ny/--nx/--dy/--dx required without --plan");
      plan.base_grid = *grid;
      plan.n_realizations = exp_n;
      plan.theta0 = exp_params.resolve();
      plan.window_pattern = exp_pattern;
      plan.seed = exp_seed;
    }
    if (exp_restarts > 0) plan.restarts = exp_restarts;
    if (exp_jobs > 0) plan.jobs = exp_jobs;
    if (exp_no_predict) plan.predict = false;
    const auto result = mw::run_experiment(plan);
    mw::write_experiment_artifacts(result, exp_outdir);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mw::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const mw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
