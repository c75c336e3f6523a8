#ifndef CONFBENCH_CONFIDNET_HPP
#define CONFBENCH_CONFIDNET_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "confbench/classifier.hpp"
#include "confbench/dataset.hpp"
#include "confbench/layers.hpp"
#include "confbench/optim.hpp"

namespace confbench {

enum class TargetKind { kTcp, kTcpRatio, kBinaryCorrectness };
enum class LossKind { kMse, kBce, kFocal, kRanking };
enum class TrainingFold { kTrain, kVal };

TargetKind target_from_string(const std::string& name);
std::string target_to_string(TargetKind kind);
LossKind loss_from_string(const std::string& name);
std::string loss_to_string(LossKind kind);
TrainingFold fold_from_string(const std::string& name);
std::string fold_to_string(TrainingFold fold);

struct PhaseSchedule {
  int max_epochs = 100;
  int patience = 5;  // early stopping on held-out loss; <= 0 disables
  std::size_t batch_size = 128;
};

struct ConfidNetConfig {
  TargetKind target_kind = TargetKind::kTcp;
  LossKind loss_kind = LossKind::kMse;
  TrainingFold training_fold = TrainingFold::kTrain;

  PhaseSchedule phase1;
  PhaseSchedule phase2{30, 5, 128};
  bool phase2_enabled = true;
  double phase2_lr_factor = 0.1;
  bool phase2_train_head = true;  // fine-tune theta jointly with the encoder clone

  OptimizerSettings optimizer{.kind = "adam", .learning_rate = 1e-4};
  double holdout_fraction = 0.1;  // slice of the training fold used for early stopping
  double focal_gamma = 2.0;
  double ranking_margin = 0.1;
  std::uint64_t seed = 0;

  /// Enforces the loss/target pairing rules: mse regresses tcp or tcp-ratio,
  /// bce and focal need binary-correctness, ranking accepts anything.
  void validate() const;
};

/// The confidence head ĉ(·, θ): five dense layers (400-400-400-400-1) with
/// ReLU between and a final sigmoid, attached to penultimate features.
struct ConfidenceHead {
  Sequential net;
  std::size_t input_dim = 0;
  std::vector<double> epoch_loss;  // per-epoch mean training loss

  std::vector<double> scores(const Tensor& features) const;
};

ConfidenceHead build_head(std::size_t input_dim, std::uint64_t seed);

/// Per-sample regression targets c*, computed once with dropout in inference
/// mode (valid because w stays frozen during head training).
std::vector<double> build_targets(const TrainedClassifier& model, const LabeledDataset& fold,
                                  TargetKind kind);

/// A frozen classifier plus the trained head; after phase 2 the confidence
/// path runs through a fine-tuned clone of the encoder while the classifier
/// itself stays untouched.
struct ConfidencePredictor {
  TrainedClassifier classifier;
  ConfidenceHead head;
  std::optional<Sequential> finetuned_encoder;
  int phase = 0;  // 0 = untrained, 1 = head only, 2 = fine-tuned encoder
  ConfidNetConfig config;

  /// Confidence scores in [0, 1], one per input row. Deterministic: dropout
  /// stays off on every path.
  std::vector<double> confidence(const Tensor& inputs) const;
};

/// Phase 1: freezes all of M and fits θ to the targets. The returned
/// predictor owns a copy of the classifier; its parameter hash is asserted
/// unchanged.
ConfidencePredictor train_head(const TrainedClassifier& model, const LabeledDataset& fold,
                               const ConfidNetConfig& config);

/// Phase 2: clones the encoder, deactivates dropout on the clone, and trains
/// it (optionally together with θ) at learning_rate × phase2_lr_factor. The
/// classification path is untouched.
void finetune_encoder(ConfidencePredictor& predictor, const LabeledDataset& fold,
                      const ConfidNetConfig& config);

void save_predictor(const ConfidencePredictor& predictor, const std::filesystem::path& path);
ConfidencePredictor load_predictor(const std::filesystem::path& path,
                                   const TrainedClassifier& classifier);

}  // namespace confbench

#endif  // CONFBENCH_CONFIDNET_HPP
