#include "confbench/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>

#include "confbench/digest.hpp"
#include "confbench/errors.hpp"
#include "confbench/losses.hpp"

namespace confbench {

Arch arch_from_string(const std::string& name) {
  if (name == "mlp") return Arch::kMlp;
  if (name == "small-convnet") return Arch::kSmallConvnet;
  throw ConfigError("unknown arch '" + name + "' (expected mlp | small-convnet)");
}

std::string arch_to_string(Arch arch) {
  return arch == Arch::kMlp ? "mlp" : "small-convnet";
}

void ClassifierSpec::validate() const {
  if (num_classes < 2) {
    throw ConfigError("classifier: num_classes must be >= 2, got " +
                      std::to_string(num_classes));
  }
  if (input_shape.empty()) throw ConfigError("classifier: input_shape is empty");
  for (std::size_t d : input_shape) {
    if (d == 0) throw ConfigError("classifier: input_shape has a zero dimension");
  }
  if (hidden.empty()) throw ConfigError("classifier: need at least one hidden size");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("classifier: hidden sizes must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("classifier: dropout_rate must lie in [0, 1)");
  }
  if (arch == Arch::kSmallConvnet && input_shape.size() != 3) {
    throw ConfigError("classifier: small-convnet needs a [C x H x W] input_shape");
  }
}

std::size_t ClassifierSpec::input_size() const {
  std::size_t n = 1;
  for (std::size_t d : input_shape) n *= d;
  return n;
}

std::size_t TrainedClassifier::penultimate_width() const {
  const auto& dense = dynamic_cast<const Dense&>(output_layer.layer(0));
  return dense.in_features();
}

void TrainedClassifier::check_input(const Tensor& input) const {
  const std::size_t expected = spec.input_size();
  if (input.rank() < 1 || input.size() / input.dim(0) != expected) {
    throw ShapeError("classifier input " + input.shape_string() + ": expected " +
                     std::to_string(expected) + " values per sample");
  }
}

Tensor TrainedClassifier::logits(const Tensor& input, Mode mode) const {
  check_input(input);
  return output_layer.forward(encoder.forward(input, mode), mode);
}

Prediction TrainedClassifier::predict(const Tensor& input) const {
  Prediction out;
  out.probs = softmax(logits(input, Mode::kInference));
  const std::size_t n = out.probs.dim(0);
  out.predicted.resize(n);
  out.mcp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.predicted[i] = argmax_row(out.probs, i);
    out.mcp[i] = out.probs.at(i, static_cast<std::size_t>(out.predicted[i]));
  }
  return out;
}

Tensor TrainedClassifier::penultimate_features(const Tensor& input) const {
  check_input(input);
  return encoder.forward(input, Mode::kInference);
}

std::vector<Tensor*> TrainedClassifier::parameters() const {
  std::vector<Tensor*> params = encoder.parameters();
  for (Tensor* p : output_layer.parameters()) params.push_back(p);
  return params;
}

std::string TrainedClassifier::parameter_hash() const {
  std::vector<double> blob;
  for (const Tensor* p : parameters()) {
    blob.insert(blob.end(), p->data.begin(), p->data.end());
  }
  return sha256_hex(std::span<const double>(blob));
}

TrainedClassifier TrainedClassifier::clone() const {
  TrainedClassifier copy;
  copy.spec = spec;
  copy.encoder = encoder.clone();
  copy.output_layer = output_layer.clone();
  copy.log = log;
  copy.seed = seed;
  return copy;
}

int argmax_row(const Tensor& probs, std::size_t row) {
  const std::size_t k = probs.cols();
  std::size_t best = 0;
  for (std::size_t j = 1; j < k; ++j) {
    if (probs.at(row, j) > probs.at(row, best)) best = j;  // ties keep lowest index
  }
  return static_cast<int>(best);
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
  if (predicted.size() != labels.size()) {
    throw ShapeError("accuracy: " + std::to_string(predicted.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (predicted.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

namespace {

// Output spatial size of a valid-padding convolution / pooling chain.
std::size_t conv_out(std::size_t in, std::size_t kernel) { return in - kernel + 1; }

Sequential build_mlp_encoder(const ClassifierSpec& spec) {
  Sequential encoder;
  encoder.add(std::make_unique<Flatten>());
  std::size_t width = spec.input_size();
  for (std::size_t h : spec.hidden) {
    encoder.add(std::make_unique<Dense>(width, h));
    encoder.add(std::make_unique<Relu>());
    encoder.add(std::make_unique<Dropout>(spec.dropout_rate, 0));
    width = h;
  }
  return encoder;
}

Sequential build_convnet_encoder(const ClassifierSpec& spec) {
  const std::size_t channels = spec.input_shape[0];
  std::size_t h = spec.input_shape[1];
  std::size_t w = spec.input_shape[2];

  Sequential encoder;
  encoder.add(std::make_unique<Conv2d>(channels, 32, 3));
  encoder.add(std::make_unique<Relu>());
  encoder.add(std::make_unique<MaxPool2d>(2));
  h = conv_out(h, 3) / 2;
  w = conv_out(w, 3) / 2;
  encoder.add(std::make_unique<Conv2d>(32, 64, 3));
  encoder.add(std::make_unique<Relu>());
  encoder.add(std::make_unique<MaxPool2d>(2));
  h = conv_out(h, 3) / 2;
  w = conv_out(w, 3) / 2;
  if (h == 0 || w == 0) {
    throw ConfigError("classifier: input too small for the small-convnet stack");
  }
  encoder.add(std::make_unique<Flatten>());
  encoder.add(std::make_unique<Dense>(64 * h * w, spec.hidden[0]));
  encoder.add(std::make_unique<Relu>());
  encoder.add(std::make_unique<Dropout>(spec.dropout_rate, 0));
  return encoder;
}

}  // namespace

TrainedClassifier build_classifier(const ClassifierSpec& spec, std::uint64_t seed) {
  spec.validate();
  TrainedClassifier model;
  model.spec = spec;
  model.seed = seed;
  model.encoder =
      spec.arch == Arch::kMlp ? build_mlp_encoder(spec) : build_convnet_encoder(spec);
  const std::size_t penultimate =
      spec.arch == Arch::kMlp ? spec.hidden.back() : spec.hidden[0];
  model.output_layer.add(
      std::make_unique<Dense>(penultimate, static_cast<std::size_t>(spec.num_classes)));

  Rng init_rng(derive_seed(seed, "init"));
  model.encoder.init_params(init_rng);
  model.output_layer.init_params(init_rng);
  model.encoder.reseed_dropout(derive_seed(seed, "dropout"));
  return model;
}

TrainedClassifier train_classifier(const ClassifierSpec& spec, const LabeledDataset& train,
                                   const LabeledDataset& val, const TrainConfig& config) {
  spec.validate();
  train.validate();
  if (train.num_classes != spec.num_classes) {
    throw ConfigError("classifier: dataset has " + std::to_string(train.num_classes) +
                      " classes, spec expects " + std::to_string(spec.num_classes));
  }
  if (config.max_epochs < 1) throw ConfigError("classifier: max_epochs must be >= 1");

  TrainedClassifier model = build_classifier(spec, config.seed);
  const std::vector<Tensor*> params = model.parameters();
  const auto optimizer = make_optimizer(config.optimizer);

  double best_val = -1.0;
  int stale_epochs = 0;
  std::vector<std::vector<double>> best_snapshot;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto batches = make_batches(train.size(), config.batch_size,
                                      derive_seed(config.seed, "shuffle", epoch));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& batch : batches) {
      const Tensor x = gather_rows(train.features, batch);
      std::vector<int> y(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) y[i] = train.labels[batch[i]];

      const Tensor logits = model.output_layer.forward(
          model.encoder.forward(x, Mode::kTrain), Mode::kTrain);
      const auto ce = softmax_cross_entropy(logits, y);
      if (!std::isfinite(ce.value)) {
        throw TrainingError("classifier diverged at epoch " + std::to_string(epoch) +
                            " (non-finite loss)");
      }
      loss_sum += ce.value * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (argmax_row(ce.probs, i) == y[i]) ++correct;
      }
      model.encoder.backward(model.output_layer.backward(ce.grad_logits));
      optimizer->step(params);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    if (!val.labels.empty()) {
      stats.val_accuracy = accuracy(model.predict(val.features).predicted, val.labels);
    }
    model.log.push_back(stats);

    if (!val.labels.empty() && config.patience > 0) {
      if (stats.val_accuracy > best_val) {
        best_val = stats.val_accuracy;
        best_snapshot = snapshot_parameters(params);
        stale_epochs = 0;
      } else if (++stale_epochs >= config.patience) {
        break;
      }
    }
  }

  if (!best_snapshot.empty()) restore_parameters(params, best_snapshot);

  if (model.log.size() > 1 && model.log.back().train_loss >= model.log.front().train_loss) {
    throw TrainingError("classifier failed to reduce training loss (epoch 1: " +
                        std::to_string(model.log.front().train_loss) + ", final: " +
                        std::to_string(model.log.back().train_loss) + ")");
  }
  return model;
}

}  // namespace confbench
