#include <benchmark/benchmark.h>

#include "confbench/rng.hpp"
#include "confbench/trustscore.hpp"

namespace {

using namespace confbench;

struct Instance {
  Tensor features;
  std::vector<int> labels;
  Tensor queries;
  std::vector<int> predicted;
};

Instance make_instance(std::size_t n, std::size_t dim, std::size_t q) {
  Rng rng(11);
  Instance inst{Tensor({n, dim}), std::vector<int>(n), Tensor({q, dim}),
                std::vector<int>(q)};
  for (double& v : inst.features.data) v = rng.uniform(-2.0, 2.0);
  for (std::size_t i = 0; i < n; ++i) inst.labels[i] = static_cast<int>(i % 5);
  for (double& v : inst.queries.data) v = rng.uniform(-2.0, 2.0);
  for (std::size_t i = 0; i < q; ++i) inst.predicted[i] = static_cast<int>(rng.below(5));
  return inst;
}

void trustscore_queries(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const bool tree = state.range(2) != 0;
  const Instance inst = make_instance(n, dim, 256);

  TrustScoreConfig config;
  config.backend = tree ? TrustScoreBackend::kKdTree : TrustScoreBackend::kBrute;
  const auto index = TrustScoreIndex::fit(inst.features, inst.labels, 5, config);

  for (auto _ : state) {
    benchmark::DoNotOptimize(index.scores(inst.queries, inst.predicted));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 256);
}
BENCHMARK(trustscore_queries)
    ->Args({2000, 2, 0})
    ->Args({2000, 2, 1})
    ->Args({20000, 8, 0})
    ->Args({20000, 8, 1});

void trustscore_fit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Instance inst = make_instance(n, 8, 1);
  TrustScoreConfig config;
  config.alpha = 0.1;  // density filtering on: dominated by the k-NN radius scan
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrustScoreIndex::fit(inst.features, inst.labels, 5, config));
  }
}
BENCHMARK(trustscore_fit)->Arg(500)->Arg(2000);

}  // namespace
