#include "mw/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mw/rng.hpp"

namespace mw {

namespace {

struct FreeSet {
  std::array<bool, 3> active{};
  std::vector<int> idx;
};

FreeSet resolve_free_set(const FitOptions& opt, MaternParams& base) {
  if (opt.special_case) {
    if (opt.special_case->is_infinite())
      throw UnsupportedCaseError(
          "fit: the squared-exponential limit has no finite smoothness to optimize against; fix a "
          "large smoothness instead");
    if (opt.fixed_smoothness &&
        *opt.fixed_smoothness != opt.special_case->smoothness())
      throw ValidationError("fit: fixed_smoothness conflicts with the special case");
    base.smoothness = opt.special_case->smoothness();
  }
  if (opt.fixed_variance) base.variance = *opt.fixed_variance;
  if (opt.fixed_smoothness) base.smoothness = *opt.fixed_smoothness;
  if (opt.fixed_range) base.range = *opt.fixed_range;

  FreeSet fs;
  fs.active = {!opt.fixed_variance.has_value(),
               !(opt.fixed_smoothness.has_value() || opt.special_case.has_value()),
               !opt.fixed_range.has_value()};
  for (int i = 0; i < 3; ++i)
    if (fs.active[static_cast<std::size_t>(i)]) fs.idx.push_back(i);
  return fs;
}

struct RestartOutcome {
  MaternParams params;
  double nll = 0.0;
  double score_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  bool hit_cap = false;
};

// BFGS over x = log(free parameters); positivity holds by construction and
// the optimum is unchanged. Gradient chain rule: d nll / dx_i = score_i * theta_i.
RestartOutcome minimize_restart(const LikelihoodEngine& engine, const SpectralField& pergram,
                                const MaternParams& start, const FreeSet& fs,
                                const FitOptions& opt) {
  const int dim = static_cast<int>(fs.idx.size());
  RestartOutcome out;
  out.params = start;

  auto pack = [&](const MaternParams& p) {
    std::vector<double> x(static_cast<std::size_t>(dim));
    const Vec3 v = p.as_vec();
    for (int i = 0; i < dim; ++i)
      x[static_cast<std::size_t>(i)] = std::log(v[static_cast<std::size_t>(fs.idx[static_cast<std::size_t>(i)])]);
    return x;
  };
  auto unpack = [&](const std::vector<double>& x) {
    MaternParams p = start;
    double* slots[3] = {&p.variance, &p.smoothness, &p.range};
    for (int i = 0; i < dim; ++i)
      *slots[fs.idx[static_cast<std::size_t>(i)]] = std::exp(x[static_cast<std::size_t>(i)]);
    p.active = fs.active;
    return p;
  };
  const double cap = std::log(opt.smoothness_cap);
  auto clamp_cap = [&](std::vector<double>& x) {
    bool clamped = false;
    for (int i = 0; i < dim; ++i)
      if (fs.idx[static_cast<std::size_t>(i)] == 1 && x[static_cast<std::size_t>(i)] > cap) {
        x[static_cast<std::size_t>(i)] = cap;
        clamped = true;
      }
    return clamped;
  };

  auto eval = [&](const std::vector<double>& x, Vec3* score_out) {
    const MaternParams p = unpack(x);
    // a wild line-search step can push exp(x) out of double range
    if (!(std::isfinite(p.variance) && p.variance > 0.0) ||
        !(std::isfinite(p.smoothness) && p.smoothness > 0.0) ||
        !(std::isfinite(p.range) && p.range > 0.0))
      return std::numeric_limits<double>::infinity();
    if (score_out) {
      const auto ev = engine.nll_and_score(p, pergram);
      *score_out = ev.score;
      return ev.nll;
    }
    return engine.nll(p, pergram);
  };
  auto log_gradient = [&](const std::vector<double>& x, const Vec3& score) {
    std::vector<double> g(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
      g[static_cast<std::size_t>(i)] = score[static_cast<std::size_t>(fs.idx[static_cast<std::size_t>(i)])] *
                                       std::exp(x[static_cast<std::size_t>(i)]);
    return g;
  };
  auto score_inf_norm = [&](const Vec3& score) {
    double m = 0.0;
    for (int i : fs.idx) m = std::max(m, std::abs(score[static_cast<std::size_t>(i)]));
    return m;
  };

  std::vector<double> x = pack(start);
  clamp_cap(x);
  Vec3 score{};
  double f;
  try {
    f = eval(x, &score);
  } catch (const NumericalError&) {
    out.diverged = true;
    return out;
  }
  std::vector<double> g = log_gradient(x, score);

  // inverse Hessian approximation
  std::vector<double> h(static_cast<std::size_t>(dim * dim), 0.0);
  auto reset_h = [&] {
    std::fill(h.begin(), h.end(), 0.0);
    for (int i = 0; i < dim; ++i) h[static_cast<std::size_t>(i * dim + i)] = 1.0;
  };
  reset_h();

  constexpr double kArmijo = 1e-4;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it;
    out.score_norm = score_inf_norm(score);
    if (out.score_norm <= opt.gradient_tolerance) {
      out.converged = true;
      break;
    }
    // p = -H g
    std::vector<double> dir(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        dir[static_cast<std::size_t>(i)] -=
            h[static_cast<std::size_t>(i * dim + j)] * g[static_cast<std::size_t>(j)];
    double gtp = 0.0;
    for (int i = 0; i < dim; ++i) gtp += g[static_cast<std::size_t>(i)] * dir[static_cast<std::size_t>(i)];
    if (gtp >= 0.0) {
      reset_h();
      for (int i = 0; i < dim; ++i) dir[static_cast<std::size_t>(i)] = -g[static_cast<std::size_t>(i)];
      gtp = 0.0;
      for (int i = 0; i < dim; ++i) gtp += g[static_cast<std::size_t>(i)] * dir[static_cast<std::size_t>(i)];
    }

    double alpha = 1.0;
    std::vector<double> x_new = x;
    double f_new = f;
    bool accepted = false;
    bool saw_nonfinite = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < dim; ++i)
        x_new[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + alpha * dir[static_cast<std::size_t>(i)];
      const bool clamped = clamp_cap(x_new);
      out.hit_cap = out.hit_cap || clamped;
      try {
        f_new = eval(x_new, nullptr);
        if (!std::isfinite(f_new)) saw_nonfinite = true;
        if (std::isfinite(f_new) && f_new <= f + kArmijo * alpha * gtp) {
          accepted = true;
          break;
        }
      } catch (const NumericalError&) {
        saw_nonfinite = true;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.diverged = saw_nonfinite && !std::isfinite(f_new);
      break;  // stalled: keep the best point found so far
    }

    Vec3 score_new{};
    double f_check;
    try {
      f_check = eval(x_new, &score_new);
    } catch (const NumericalError&) {
      out.diverged = true;
      break;
    }
    (void)f_check;
    std::vector<double> g_new = log_gradient(x_new, score_new);

    // BFGS inverse update
    std::vector<double> s(static_cast<std::size_t>(dim)), y(static_cast<std::size_t>(dim));
    double ys = 0.0;
    for (int i = 0; i < dim; ++i) {
      s[static_cast<std::size_t>(i)] = x_new[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(i)] = g_new[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)];
      ys += s[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    if (ys > 1e-14) {
      const double rho = 1.0 / ys;
      std::vector<double> hy(static_cast<std::size_t>(dim), 0.0);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          hy[static_cast<std::size_t>(i)] +=
              h[static_cast<std::size_t>(i * dim + j)] * y[static_cast<std::size_t>(j)];
      double yhy = 0.0;
      for (int i = 0; i < dim; ++i) yhy += y[static_cast<std::size_t>(i)] * hy[static_cast<std::size_t>(i)];
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          const double si = s[static_cast<std::size_t>(i)], sj = s[static_cast<std::size_t>(j)];
          h[static_cast<std::size_t>(i * dim + j)] +=
              (1.0 + rho * yhy) * rho * si * sj -
              rho * (hy[static_cast<std::size_t>(i)] * sj + si * hy[static_cast<std::size_t>(j)]);
        }
    } else {
      reset_h();
    }
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    score = score_new;
    out.iterations = it + 1;
    out.score_norm = score_inf_norm(score);
    if (out.score_norm <= opt.gradient_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.params = unpack(x);
  out.nll = f;
  return out;
}

}  // namespace

MaternParams initial_guess(const Field& field, const SamplingWindow& window, std::uint64_t seed) {
  (void)seed;  // the unperturbed base is deterministic; restarts jitter it
  window.validate();
  if (!field.grid.same_shape(window.grid))
    throw ShapeMismatchError("initial_guess: field and window grids differ");
  if (window.k_sum < 16.0) throw InsufficientDataError("initial_guess: need K >= 16 samples");
  const GridSpec& g = window.grid;
  double mean = 0.0;
  for (int i = 0; i < g.size(); ++i)
    mean += window.weights[static_cast<std::size_t>(i)] * field.values[static_cast<std::size_t>(i)];
  mean /= window.k_sum;
  double var = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double d = field.values[static_cast<std::size_t>(i)] - mean;
    var += window.weights[static_cast<std::size_t>(i)] * d * d;
  }
  var /= window.k_sum;
  if (!(var > 0.0)) throw DegenerateFieldError("initial_guess: windowed sample variance is zero");
  MaternParams p;
  p.variance = var;
  p.smoothness = 2.0;
  p.range = std::sqrt(g.dy * g.dx * g.ny * g.nx) / (20.0 * std::numbers::pi);
  return p;
}

EstimateReport fit(const Field& field, const SamplingWindow& window, const FitOptions& options) {
  if (options.restarts < 1) throw DomainError("fit: restarts must be >= 1");
  if (!(options.gradient_tolerance > 0.0)) throw DomainError("fit: gradient_tolerance must be > 0");

  MaternParams base = initial_guess(field, window, options.seed);
  const FreeSet fs = resolve_free_set(options, base);
  base.active = fs.active;

  LikelihoodEngine engine(window, options.spectral);
  const SpectralField pergram = engine.periodogram(field);

  EstimateReport report;

  if (fs.idx.empty()) {
    // every parameter pinned: evaluate and report
    report.params_hat = base;
    report.objective_value = engine.nll(base, pergram);
    report.score_norm = 0.0;
    report.converged = true;
  } else {
    std::optional<RestartOutcome> best;
    int best_restart = 0;
    int diverged_count = 0;
    CounterRng rng(options.seed);
    for (int r = 0; r < options.restarts; ++r) {
      MaternParams start = base;
      if (r > 0) {
        // multiplicative log-normal jitter, sd 0.2 in log space
        double* slots[3] = {&start.variance, &start.smoothness, &start.range};
        for (int i : fs.idx)
          *slots[i] *= std::exp(0.2 * rng.gaussian(static_cast<std::uint64_t>(i),
                                                   static_cast<std::uint64_t>(r)));
      }
      RestartOutcome oc = minimize_restart(engine, pergram, start, fs, options);
      if (oc.diverged && !oc.converged) {
        ++diverged_count;
        if (!std::isfinite(oc.nll)) continue;
      }
      const bool better = !best || oc.nll < best->nll ||
                          (oc.nll == best->nll && oc.score_norm < best->score_norm);
      if (better) {
        best = oc;
        best_restart = r;
      }
    }
    if (!best)
      throw OptimizerDivergenceError("fit: objective non-finite from every restart");
    report.params_hat = best->params;
    report.objective_value = best->nll;
    report.score_norm = best->score_norm;
    report.iterations = best->iterations;
    report.converged = best->converged;
    report.best_restart = best_restart;
    if (!best->converged) report.warnings.push_back("optimizer stopped before the score tolerance");
    if (diverged_count > 0)
      report.warnings.push_back(std::to_string(diverged_count) + " restart(s) diverged");
    if (best->hit_cap) report.warnings.push_back("smoothness hit the optimizer cap");
    if (report.params_hat.smoothness > 10.0)
      report.warnings.push_back(
          "smoothness estimate above 10: near the saturation regime, consider fixing it");
  }

  report.fisher_matrix = engine.fisher(report.params_hat);
  report.hessian_matrix = engine.hessian(report.params_hat, pergram);
  report.covariance.evaluated_at = report.params_hat;

  if (options.compute_covariance && !fs.idx.empty()) {
    UncertaintyOptions uopt;
    uopt.spectral = options.spectral;
    uopt.jobs = options.jobs;
    try {
      report.covariance = param_covariance(report.params_hat, window, uopt);
      if (report.covariance.fisher_warning)
        report.warnings.push_back("Fisher information is near-singular");
    } catch (const SingularFisherError&) {
      report.warnings.push_back("Fisher information singular: no covariance attached");
      report.covariance = ParamCovariance{};
      report.covariance.evaluated_at = report.params_hat;
    }
  }
  if (options.compute_diagnostics) {
    report.diagnostics =
        residual_report(pergram, engine.blurred_density(report.params_hat), options.residual_alpha);
  }
  return report;
}

}  // namespace mw
