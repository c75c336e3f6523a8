#include <benchmark/benchmark.h>

#include "confbench/layers.hpp"
#include "confbench/losses.hpp"
#include "confbench/rng.hpp"

namespace {

using namespace confbench;

Tensor random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t({rows, cols});
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

void dense_forward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  Dense layer(784, 256);
  Rng rng(1);
  layer.init_params(rng);
  const Tensor input = random_batch(batch, 784, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(layer.forward(input, Mode::kInference));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(batch));
}
BENCHMARK(dense_forward)->Arg(32)->Arg(128)->Arg(512);

void dense_train_step(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  Sequential net;
  net.add(std::make_unique<Dense>(784, 256));
  net.add(std::make_unique<Relu>());
  net.add(std::make_unique<Dense>(256, 10));
  Rng rng(1);
  net.init_params(rng);
  for (Tensor* p : net.parameters()) p->ensure_grad();

  const Tensor input = random_batch(batch, 784, 2);
  std::vector<int> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>(i % 10);

  for (auto _ : state) {
    for (Tensor* p : net.parameters()) p->clear_grad();
    const Tensor logits = net.forward(input, Mode::kTrain);
    const auto loss = softmax_cross_entropy(logits, labels);
    benchmark::DoNotOptimize(net.backward(loss.grad_logits));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(batch));
}
BENCHMARK(dense_train_step)->Arg(32)->Arg(128);

void softmax_xent(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Tensor logits = random_batch(batch, 10, 3);
  std::vector<int> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>(i % 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(softmax_cross_entropy(logits, labels));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(batch));
}
BENCHMARK(softmax_xent)->Arg(128)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
