#include <benchmark/benchmark.h>

#include "focus/factors.hpp"
#include "focus/linalg.hpp"
#include "focus/panel.hpp"
#include "focus/pipeline.hpp"
#include "focus/sim.hpp"

namespace {

focus::Panel dgp1_panel(Eigen::Index n, Eigen::Index t) {
  return focus::generate_panel(focus::DgpConfig::dgp1(n, t, 7)).panel;
}

void BM_PairwiseCovariance(benchmark::State& state) {
  const auto panel = dgp1_panel(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(focus::pairwise_covariance(panel));
}
BENCHMARK(BM_PairwiseCovariance)->Args({64, 256})->Args({512, 512})->Args({1000, 1024});

void BM_TopEigenpairs(benchmark::State& state) {
  const auto panel = dgp1_panel(256, state.range(0));
  const auto cov = focus::pairwise_covariance(panel);
  const auto method = state.range(1) == 0 ? focus::EigenMethod::kFull : focus::EigenMethod::kIterative;
  for (auto _ : state) benchmark::DoNotOptimize(focus::top_eigenpairs(cov.sigma_hat, 3, method));
}
BENCHMARK(BM_TopEigenpairs)->Args({256, 0})->Args({256, 1})->Args({1024, 0})->Args({1024, 1});

void BM_OverlapStats(benchmark::State& state) {
  const auto panel = dgp1_panel(state.range(0), state.range(1));
  const auto samples = static_cast<std::size_t>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(focus::compute_overlap_stats(panel, samples));
}
BENCHMARK(BM_OverlapStats)->Args({64, 64, 0})->Args({256, 512, 0})->Args({256, 512, 100000});

void BM_FitAndForecast(benchmark::State& state) {
  const auto panel = dgp1_panel(64, state.range(0));
  for (auto _ : state) {
    const auto model = focus::fit_focus(panel);
    benchmark::DoNotOptimize(focus::forecast_with_ci(panel, model, {1}, 0.05));
  }
}
BENCHMARK(BM_FitAndForecast)->Arg(32)->Arg(128)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
