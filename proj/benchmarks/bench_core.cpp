#include <benchmark/benchmark.h>

#include "mw/estimate.hpp"
#include "mw/likelihood.hpp"
#include "mw/matern.hpp"
#include "mw/simulate.hpp"
#include "mw/specfun.hpp"
#include "mw/uncertainty.hpp"

namespace {

const mw::MaternParams kTheta{3.0, 0.75, 4.0, {true, true, true}};

void BM_bessel_k(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mw::specfun::bessel_k(0.75, x));
    x = x < 40.0 ? x + 0.37 : 0.1;
  }
}
BENCHMARK(BM_bessel_k);

void BM_dbessel_k_dorder(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mw::specfun::dbessel_k_dorder(0.75, x));
    x = x < 6.0 ? x + 0.173 : 0.1;
  }
}
BENCHMARK(BM_dbessel_k_dorder);

void BM_covariance_gradient(benchmark::State& state) {
  double r = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mw::matern::covariance_with_gradient(kTheta, r));
    r = r < 30.0 ? r + 0.41 : 0.05;
  }
}
BENCHMARK(BM_covariance_gradient);

void BM_simulate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mw::GridSpec grid{n, n, 1.0, 1.0};
  const mw::FieldSimulator sim(kTheta, grid);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim.draw(seed++));
  state.SetComplexityN(n);
}
BENCHMARK(BM_simulate)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_blurred_density(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mw::GridSpec grid{n, n, 1.0, 1.0};
  const auto window = mw::make_window(grid, mw::RandomDeletionPattern{0.667, 7});
  const mw::LikelihoodEngine engine(window);
  double bump = 0.0;
  for (auto _ : state) {
    mw::MaternParams p = kTheta;
    p.range += bump;  // defeat the engine cache
    bump = bump < 1.0 ? bump + 1e-3 : 0.0;
    benchmark::DoNotOptimize(engine.blurred_density(p));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_blurred_density)->RangeMultiplier(2)->Range(32, 128)->Complexity();

void BM_fit_64(benchmark::State& state) {
  const mw::GridSpec grid{64, 64, 1.0, 1.0};
  const auto window = mw::make_window(grid, mw::RandomDeletionPattern{0.667, 7});
  const auto sim = mw::simulate_field(kTheta, grid, 11);
  mw::FitOptions opt;
  opt.restarts = 1;
  opt.compute_covariance = false;
  opt.compute_diagnostics = false;
  for (auto _ : state) benchmark::DoNotOptimize(mw::fit(sim.field, window, opt));
}
BENCHMARK(BM_fit_64);

void BM_score_covariance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mw::GridSpec grid{n, n, 1.0, 1.0};
  const auto window = mw::make_window(grid, mw::RandomDeletionPattern{0.667, 7});
  for (auto _ : state) benchmark::DoNotOptimize(mw::score_covariance(kTheta, window));
  state.SetComplexityN(n);
}
BENCHMARK(BM_score_covariance)->RangeMultiplier(2)->Range(8, 32)->Complexity();

}  // namespace

BENCHMARK_MAIN();
