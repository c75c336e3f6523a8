#include "confbench/mcdropout.hpp"

#include "confbench/criteria.hpp"
#include "confbench/errors.hpp"
#include "confbench/rng.hpp"

namespace confbench {

McDropoutScorer::McDropoutScorer(const TrainedClassifier& model, McDropoutConfig config)
    : model_(model.clone()), config_(config) {
  if (config_.passes < 1) throw ConfigError("mcdropout: passes must be >= 1");
  if (!model_.encoder.has_dropout()) {
    throw ConfigError("mcdropout: model has no dropout layer to sample");
  }
}

Tensor McDropoutScorer::mean_distribution(const Tensor& inputs) {
  Tensor sum;
  for (int pass = 0; pass < config_.passes; ++pass) {
    // Fresh per-pass streams make the result independent of call history.
    model_.encoder.reseed_dropout(
        derive_seed(config_.seed, "mc-pass", static_cast<std::uint64_t>(pass)));
    const Tensor probs = softmax(model_.logits(inputs, Mode::kMcSample));
    if (pass == 0) {
      sum = probs;
    } else {
      require_same_shape(sum, probs, "mcdropout");
      for (std::size_t i = 0; i < sum.size(); ++i) sum.data[i] += probs.data[i];
    }
  }
  const double scale = 1.0 / static_cast<double>(config_.passes);
  for (double& v : sum.data) v *= scale;
  return sum;
}

std::vector<double> McDropoutScorer::scores(const Tensor& inputs) {
  const Tensor mean = mean_distribution(inputs);
  const std::size_t n = mean.dim(0);
  const std::size_t k = mean.cols();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = entropy_confidence(std::span<const double>(mean.data.data() + i * k, k));
  }
  return out;
}

}  // namespace confbench
