#include "confbench/confidnet.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "confbench/checkpoint.hpp"
#include "confbench/criteria.hpp"
#include "confbench/errors.hpp"
#include "confbench/losses.hpp"

namespace confbench {

TargetKind target_from_string(const std::string& name) {
  if (name == "tcp") return TargetKind::kTcp;
  if (name == "tcp-ratio") return TargetKind::kTcpRatio;
  if (name == "binary-correctness") return TargetKind::kBinaryCorrectness;
  throw ConfigError("unknown target '" + name +
                    "' (expected tcp | tcp-ratio | binary-correctness)");
}

std::string target_to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::kTcp: return "tcp";
    case TargetKind::kTcpRatio: return "tcp-ratio";
    case TargetKind::kBinaryCorrectness: return "binary-correctness";
  }
  throw ConfigError("invalid target kind");
}

LossKind loss_from_string(const std::string& name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "bce") return LossKind::kBce;
  if (name == "focal") return LossKind::kFocal;
  if (name == "ranking") return LossKind::kRanking;
  throw ConfigError("unknown loss '" + name + "' (expected mse | bce | focal | ranking)");
}

std::string loss_to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kMse: return "mse";
    case LossKind::kBce: return "bce";
    case LossKind::kFocal: return "focal";
    case LossKind::kRanking: return "ranking";
  }
  throw ConfigError("invalid loss kind");
}

TrainingFold fold_from_string(const std::string& name) {
  if (name == "train") return TrainingFold::kTrain;
  if (name == "val") return TrainingFold::kVal;
  throw ConfigError("unknown training fold '" + name + "' (expected train | val)");
}

std::string fold_to_string(TrainingFold fold) {
  return fold == TrainingFold::kTrain ? "train" : "val";
}

void ConfidNetConfig::validate() const {
  const bool binary = target_kind == TargetKind::kBinaryCorrectness;
  if (loss_kind == LossKind::kMse && binary) {
    throw ConfigError("confidnet: mse regresses tcp or tcp-ratio, not binary-correctness");
  }
  if ((loss_kind == LossKind::kBce || loss_kind == LossKind::kFocal) && !binary) {
    throw ConfigError("confidnet: " + loss_to_string(loss_kind) +
                      " needs binary-correctness targets");
  }
  if (phase1.max_epochs < 1 || phase2.max_epochs < 1) {
    throw ConfigError("confidnet: max_epochs must be >= 1");
  }
  if (phase1.batch_size < 1 || phase2.batch_size < 1) {
    throw ConfigError("confidnet: batch_size must be >= 1");
  }
  if (phase2_lr_factor < 0.0) throw ConfigError("confidnet: phase2_lr_factor must be >= 0");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
    throw ConfigError("confidnet: holdout_fraction must lie in [0, 1)");
  }
}

ConfidenceHead build_head(std::size_t input_dim, std::uint64_t seed) {
  if (input_dim == 0) throw ConfigError("confidnet: head input_dim must be positive");
  ConfidenceHead head;
  head.input_dim = input_dim;
  head.net.add(std::make_unique<Dense>(input_dim, 400));
  head.net.add(std::make_unique<Relu>());
  head.net.add(std::make_unique<Dense>(400, 400));
  head.net.add(std::make_unique<Relu>());
  head.net.add(std::make_unique<Dense>(400, 400));
  head.net.add(std::make_unique<Relu>());
  head.net.add(std::make_unique<Dense>(400, 400));
  head.net.add(std::make_unique<Relu>());
  head.net.add(std::make_unique<Dense>(400, 1));
  head.net.add(std::make_unique<Sigmoid>());
  Rng rng(derive_seed(seed, "head-init"));
  head.net.init_params(rng);
  return head;
}

std::vector<double> ConfidenceHead::scores(const Tensor& features) const {
  const Tensor out = net.forward(features, Mode::kInference);
  return out.data;
}

std::vector<double> build_targets(const TrainedClassifier& model, const LabeledDataset& fold,
                                  TargetKind kind) {
  const Prediction prediction = model.predict(fold.features);
  const std::size_t n = prediction.size();
  const std::size_t k = prediction.probs.cols();
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> row(prediction.probs.data.data() + i * k, k);
    switch (kind) {
      case TargetKind::kTcp: targets[i] = tcp(row, fold.labels[i]); break;
      case TargetKind::kTcpRatio: targets[i] = tcp_ratio(row, fold.labels[i]); break;
      case TargetKind::kBinaryCorrectness:
        targets[i] = prediction.predicted[i] == fold.labels[i] ? 1.0 : 0.0;
        break;
    }
  }
  return targets;
}

namespace {

struct BatchLoss {
  double value = 0.0;
  Tensor grad;
  bool skip = false;  // ranking batch without a (correct, incorrect) pair
};

BatchLoss head_loss(const ConfidNetConfig& config, const Tensor& conf, const Tensor& targets,
                    const Tensor& correctness) {
  BatchLoss out;
  switch (config.loss_kind) {
    case LossKind::kMse: {
      const LossResult r = mse_loss(conf, targets);
      out.value = r.value;
      out.grad = r.grad;
      break;
    }
    case LossKind::kBce: {
      const LossResult r = bce_loss(conf, targets);
      out.value = r.value;
      out.grad = r.grad;
      break;
    }
    case LossKind::kFocal: {
      const LossResult r = focal_loss(conf, targets, config.focal_gamma);
      out.value = r.value;
      out.grad = r.grad;
      break;
    }
    case LossKind::kRanking: {
      const RankingLossResult r = ranking_loss(conf, correctness, config.ranking_margin);
      out.value = r.value;
      out.grad = r.grad;
      out.skip = !r.has_pairs;
      break;
    }
  }
  return out;
}

Tensor column(const std::vector<double>& values, const std::vector<std::size_t>& indices) {
  Tensor out({indices.size(), 1});
  for (std::size_t i = 0; i < indices.size(); ++i) out.data[i] = values[indices[i]];
  return out;
}

// Held-out slice of the fold for early stopping; first chunk of a seeded
// permutation.
struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
};

HoldoutSplit make_holdout(std::size_t n, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::size_t> order = rng.permutation(n);
  const auto n_holdout = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  HoldoutSplit split;
  split.holdout.assign(order.begin(), order.begin() + n_holdout);
  split.train.assign(order.begin() + n_holdout, order.end());
  if (split.train.empty()) throw ConfigError("confidnet: holdout fraction leaves no data");
  return split;
}

}  // namespace

ConfidencePredictor train_head(const TrainedClassifier& model, const LabeledDataset& fold,
                               const ConfidNetConfig& config) {
  config.validate();
  fold.validate();
  const std::string frozen_hash = model.parameter_hash();

  // w is frozen for this whole phase, so features and targets are computed
  // once up front instead of per epoch.
  const Tensor features = model.penultimate_features(fold.features);
  const std::vector<double> targets = build_targets(model, fold, config.target_kind);
  const Prediction prediction = model.predict(fold.features);
  std::vector<double> correctness(fold.size());
  for (std::size_t i = 0; i < fold.size(); ++i) {
    correctness[i] = prediction.predicted[i] == fold.labels[i] ? 1.0 : 0.0;
  }

  const HoldoutSplit split = make_holdout(fold.size(), config.holdout_fraction,
                                          derive_seed(config.seed, "head-holdout"));

  ConfidenceHead head = build_head(model.penultimate_width(), config.seed);
  const std::vector<Tensor*> params = head.net.parameters();
  const auto optimizer = make_optimizer(config.optimizer);

  double best_holdout = 0.0;
  bool have_best = false;
  int stale = 0;
  std::vector<std::vector<double>> best_snapshot;

  for (int epoch = 1; epoch <= config.phase1.max_epochs; ++epoch) {
    const auto batches = make_batches(split.train.size(), config.phase1.batch_size,
                                      derive_seed(config.seed, "head-shuffle", epoch));
    double loss_sum = 0.0;
    std::size_t counted = 0;
    for (const auto& batch : batches) {
      std::vector<std::size_t> rows(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) rows[i] = split.train[batch[i]];
      const Tensor x = gather_rows(features, rows);
      const Tensor conf = head.net.forward(x, Mode::kTrain);
      const BatchLoss loss =
          head_loss(config, conf, column(targets, rows), column(correctness, rows));
      if (loss.skip) continue;
      if (!std::isfinite(loss.value)) {
        throw TrainingError("confidnet head diverged at epoch " + std::to_string(epoch));
      }
      loss_sum += loss.value * static_cast<double>(rows.size());
      counted += rows.size();
      head.net.backward(loss.grad);
      optimizer->step(params);
    }
    head.epoch_loss.push_back(counted == 0 ? 0.0 : loss_sum / static_cast<double>(counted));

    if (!split.holdout.empty() && config.phase1.patience > 0) {
      const Tensor hx = gather_rows(features, split.holdout);
      const Tensor hconf = head.net.forward(hx, Mode::kInference);
      const BatchLoss hloss = head_loss(config, hconf, column(targets, split.holdout),
                                        column(correctness, split.holdout));
      if (!have_best || hloss.value < best_holdout) {
        best_holdout = hloss.value;
        have_best = true;
        best_snapshot = snapshot_parameters(params);
        stale = 0;
      } else if (++stale >= config.phase1.patience) {
        break;
      }
    }
  }
  if (!best_snapshot.empty()) restore_parameters(params, best_snapshot);

  if (model.parameter_hash() != frozen_hash) {
    throw TrainingError("confidnet: classifier parameters changed during phase 1");
  }

  ConfidencePredictor predictor;
  predictor.classifier = model.clone();
  predictor.head = std::move(head);
  predictor.phase = 1;
  predictor.config = config;
  return predictor;
}

void finetune_encoder(ConfidencePredictor& predictor, const LabeledDataset& fold,
                      const ConfidNetConfig& config) {
  config.validate();
  if (predictor.phase < 1) {
    throw TrainingError("confidnet: phase 2 requires a trained head (run phase 1 first)");
  }
  const std::string frozen_hash = predictor.classifier.parameter_hash();

  const std::vector<double> targets =
      build_targets(predictor.classifier, fold, config.target_kind);
  const Prediction prediction = predictor.classifier.predict(fold.features);
  std::vector<double> correctness(fold.size());
  for (std::size_t i = 0; i < fold.size(); ++i) {
    correctness[i] = prediction.predicted[i] == fold.labels[i] ? 1.0 : 0.0;
  }

  Sequential encoder = predictor.classifier.encoder.clone();
  encoder.set_dropout_bypass(true);  // dropout off, gradients still flow

  std::vector<Tensor*> params = encoder.parameters();
  const std::vector<Tensor*> head_params = predictor.head.net.parameters();
  if (config.phase2_train_head) {
    params.insert(params.end(), head_params.begin(), head_params.end());
  }

  OptimizerSettings settings = config.optimizer;
  settings.learning_rate *= config.phase2_lr_factor;
  const auto optimizer = make_optimizer(settings);

  const HoldoutSplit split = make_holdout(fold.size(), config.holdout_fraction,
                                          derive_seed(config.seed, "finetune-holdout"));

  const auto holdout_loss = [&]() {
    const Tensor hx = gather_rows(fold.features, split.holdout);
    const Tensor hconf =
        predictor.head.net.forward(encoder.forward(hx, Mode::kInference), Mode::kInference);
    return head_loss(config, hconf, column(targets, split.holdout),
                     column(correctness, split.holdout))
        .value;
  };

  double best_holdout = 0.0;
  bool have_best = false;
  int stale = 0;
  std::vector<std::vector<double>> best_snapshot;
  std::vector<Tensor*> snapshot_params = encoder.parameters();
  snapshot_params.insert(snapshot_params.end(), head_params.begin(), head_params.end());

  for (int epoch = 1; epoch <= config.phase2.max_epochs; ++epoch) {
    const auto batches = make_batches(split.train.size(), config.phase2.batch_size,
                                      derive_seed(config.seed, "finetune-shuffle", epoch));
    double loss_sum = 0.0;
    std::size_t counted = 0;
    for (const auto& batch : batches) {
      std::vector<std::size_t> rows(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) rows[i] = split.train[batch[i]];
      const Tensor x = gather_rows(fold.features, rows);
      const Tensor feats = encoder.forward(x, Mode::kTrain);
      const Tensor conf = predictor.head.net.forward(feats, Mode::kTrain);
      const BatchLoss loss =
          head_loss(config, conf, column(targets, rows), column(correctness, rows));
      if (loss.skip) continue;
      if (!std::isfinite(loss.value)) {
        throw TrainingError("confidnet fine-tuning diverged at epoch " + std::to_string(epoch));
      }
      loss_sum += loss.value * static_cast<double>(rows.size());
      counted += rows.size();
      encoder.backward(predictor.head.net.backward(loss.grad));
      optimizer->step(params);
      if (!config.phase2_train_head) {
        for (Tensor* p : head_params) p->clear_grad();
      }
    }
    predictor.head.epoch_loss.push_back(counted == 0 ? 0.0
                                                     : loss_sum / static_cast<double>(counted));

    if (!split.holdout.empty() && config.phase2.patience > 0) {
      const double hloss = holdout_loss();
      if (!have_best || hloss < best_holdout) {
        best_holdout = hloss;
        have_best = true;
        best_snapshot = snapshot_parameters(snapshot_params);
        stale = 0;
      } else if (++stale >= config.phase2.patience) {
        break;
      }
    }
  }
  if (!best_snapshot.empty()) restore_parameters(snapshot_params, best_snapshot);

  if (predictor.classifier.parameter_hash() != frozen_hash) {
    throw TrainingError("confidnet: classifier parameters changed during phase 2");
  }
  predictor.finetuned_encoder = std::move(encoder);
  predictor.phase = 2;
}

std::vector<double> ConfidencePredictor::confidence(const Tensor& inputs) const {
  const Tensor features = finetuned_encoder
                              ? finetuned_encoder->forward(inputs, Mode::kInference)
                              : classifier.penultimate_features(inputs);
  return head.scores(features);
}

void save_predictor(const ConfidencePredictor& predictor, const std::filesystem::path& path) {
  nlohmann::json manifest;
  manifest["kind"] = "confidnet";
  manifest["phase"] = predictor.phase;
  manifest["input_dim"] = predictor.head.input_dim;
  manifest["target"] = target_to_string(predictor.config.target_kind);
  manifest["loss"] = loss_to_string(predictor.config.loss_kind);
  manifest["training_fold"] = fold_to_string(predictor.config.training_fold);
  manifest["phase2_lr_factor"] = predictor.config.phase2_lr_factor;
  manifest["phase2_train_head"] = predictor.config.phase2_train_head;
  manifest["seed"] = predictor.config.seed;
  manifest["classifier_sha256"] = predictor.classifier.parameter_hash();
  manifest["epoch_loss"] = predictor.head.epoch_loss;

  std::vector<Tensor*> tensors = predictor.head.net.parameters();
  if (predictor.finetuned_encoder) {
    const std::vector<Tensor*> enc = predictor.finetuned_encoder->parameters();
    tensors.insert(tensors.end(), enc.begin(), enc.end());
  }
  write_checkpoint(path, std::move(manifest), tensors);
}

ConfidencePredictor load_predictor(const std::filesystem::path& path,
                                   const TrainedClassifier& classifier) {
  const CheckpointPayload payload = read_checkpoint(path);
  const auto& manifest = payload.manifest;
  if (manifest.value("kind", "") != "confidnet") {
    throw FormatError("checkpoint " + path.string() + ": kind is not 'confidnet'");
  }
  const auto input_dim = manifest.at("input_dim").get<std::size_t>();
  if (input_dim != classifier.penultimate_width()) {
    throw FormatError("checkpoint " + path.string() + ": head expects " +
                      std::to_string(input_dim) + "-wide features, classifier provides " +
                      std::to_string(classifier.penultimate_width()));
  }
  const auto expected_hash = manifest.at("classifier_sha256").get<std::string>();
  if (expected_hash != classifier.parameter_hash()) {
    throw DependencyError("checkpoint " + path.string() +
                          " was trained on a different classifier (parameter hash mismatch)");
  }

  ConfidencePredictor predictor;
  predictor.classifier = classifier.clone();
  predictor.phase = manifest.at("phase").get<int>();
  predictor.config.target_kind = target_from_string(manifest.at("target").get<std::string>());
  predictor.config.loss_kind = loss_from_string(manifest.at("loss").get<std::string>());
  predictor.config.training_fold =
      fold_from_string(manifest.at("training_fold").get<std::string>());
  predictor.config.phase2_lr_factor = manifest.at("phase2_lr_factor").get<double>();
  predictor.config.phase2_train_head = manifest.at("phase2_train_head").get<bool>();
  predictor.config.seed = manifest.at("seed").get<std::uint64_t>();
  predictor.head = build_head(input_dim, predictor.config.seed);
  predictor.head.epoch_loss = manifest.at("epoch_loss").get<std::vector<double>>();

  std::vector<Tensor*> tensors = predictor.head.net.parameters();
  if (predictor.phase >= 2) {
    predictor.finetuned_encoder = predictor.classifier.encoder.clone();
    predictor.finetuned_encoder->set_dropout_bypass(true);
    const std::vector<Tensor*> enc = predictor.finetuned_encoder->parameters();
    tensors.insert(tensors.end(), enc.begin(), enc.end());
  }
  fill_parameters(tensors, payload);
  return predictor;
}

}  // namespace confbench
