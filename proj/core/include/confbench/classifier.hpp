#ifndef CONFBENCH_CLASSIFIER_HPP
#define CONFBENCH_CLASSIFIER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "confbench/dataset.hpp"
#include "confbench/layers.hpp"
#include "confbench/optim.hpp"
#include "confbench/tensor.hpp"

namespace confbench {

enum class Arch { kMlp, kSmallConvnet };

Arch arch_from_string(const std::string& name);
std::string arch_to_string(Arch arch);

struct ClassifierSpec {
  Arch arch = Arch::kMlp;
  std::vector<std::size_t> input_shape;  // per-sample shape, e.g. {1, 28, 28}
  std::vector<std::size_t> hidden = {256};
  int num_classes = 0;
  double dropout_rate = 0.3;

  void validate() const;
  std::size_t input_size() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainConfig {
  int max_epochs = 50;
  int patience = 5;  // early stopping on val accuracy; <= 0 disables
  std::size_t batch_size = 128;
  OptimizerSettings optimizer;
  std::uint64_t seed = 0;
};

/// Batch prediction: full softmax rows, argmax class (ties broken by lowest
/// index) and the max class probability per row.
struct Prediction {
  Tensor probs;  // [N x K]
  std::vector<int> predicted;
  std::vector<double> mcp;

  std::size_t size() const { return predicted.size(); }
};

/// A trained model M split at the penultimate layer: `encoder` produces the
/// features the confidence head consumes, `output_layer` is the single
/// classification dense layer on top.
class TrainedClassifier {
 public:
  ClassifierSpec spec;
  Sequential encoder;
  Sequential output_layer;
  std::vector<EpochStats> log;
  std::uint64_t seed = 0;

  std::size_t penultimate_width() const;

  Tensor logits(const Tensor& input, Mode mode) const;
  Prediction predict(const Tensor& input) const;
  Tensor penultimate_features(const Tensor& input) const;

  std::vector<Tensor*> parameters() const;
  /// SHA-256 over every parameter blob in order; the freeze contract compares
  /// this before and after confidence-head training.
  std::string parameter_hash() const;

  TrainedClassifier clone() const;

 private:
  void check_input(const Tensor& input) const;
};

/// Architecture construction + seeded initialization, no training.
TrainedClassifier build_classifier(const ClassifierSpec& spec, std::uint64_t seed);

/// Minimizes softmax cross-entropy with seeded shuffling and optional early
/// stopping on validation accuracy (best parameters restored). Throws
/// TrainingError naming the epoch if the loss goes non-finite.
TrainedClassifier train_classifier(const ClassifierSpec& spec, const LabeledDataset& train,
                                   const LabeledDataset& val, const TrainConfig& config);

int argmax_row(const Tensor& probs, std::size_t row);
double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);

}  // namespace confbench

#endif  // CONFBENCH_CLASSIFIER_HPP
