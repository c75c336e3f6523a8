#include <benchmark/benchmark.h>

#include <cmath>

#include "confbench/metrics.hpp"
#include "confbench/rng.hpp"

namespace {

using namespace confbench;

std::vector<ScoredOutcome> synthetic_outcomes(std::size_t n, bool quantized) {
  Rng rng(7);
  std::vector<ScoredOutcome> outcomes(n);
  for (auto& o : outcomes) {
    const double c = rng.uniform();
    o.confidence = quantized ? std::round(c * 16.0) / 16.0 : c;
    o.is_error = rng.below(10) == 0;
  }
  outcomes.front().is_error = true;
  outcomes.back().is_error = false;
  return outcomes;
}

void aupr_error_sweep(benchmark::State& state) {
  const auto outcomes =
      synthetic_outcomes(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aupr(outcomes, PositiveClass::kError));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(aupr_error_sweep)->Args({1000, 0})->Args({10000, 0})->Args({10000, 1});

void auroc_sweep(benchmark::State& state) {
  const auto outcomes = synthetic_outcomes(static_cast<std::size_t>(state.range(0)), false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(auroc(outcomes));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(auroc_sweep)->Arg(1000)->Arg(10000);

void risk_coverage_sweep(benchmark::State& state) {
  const auto outcomes = synthetic_outcomes(static_cast<std::size_t>(state.range(0)), true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(risk_coverage(outcomes));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(risk_coverage_sweep)->Arg(1000)->Arg(10000);

}  // namespace
