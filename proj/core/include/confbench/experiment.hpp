#ifndef CONFBENCH_EXPERIMENT_HPP
#define CONFBENCH_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "confbench/classifier.hpp"
#include "confbench/confidnet.hpp"
#include "confbench/dataset.hpp"
#include "confbench/mcdropout.hpp"
#include "confbench/metrics.hpp"
#include "confbench/trustscore.hpp"
#include "vendor/json.hpp"

namespace confbench {

inline constexpr int kConfigSchemaVersion = 1;

struct DatasetConfig {
  std::string kind = "synth-blobs";  // synth-blobs | mnist
  std::filesystem::path mnist_dir = "data/mnist";
  int classes = 4;
  int per_class = 250;
  int dim = 2;
  double spread = 1.0;
  double train_fraction = 0.8;  // synth only; mnist splits its train file
  double val_fraction = 0.1;
  bool standardize = false;
};

struct TrustScoreSettings {
  TrustScoreConfig config;
  std::string space = "features";  // features | input
};

/// Fully-expanded experiment description. `effective` is the canonical JSON
/// (every field explicit, keys sorted) and `hash` its SHA-256; both are
/// stamped into all artifacts.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "runs/out";
  DatasetConfig dataset;

  Arch arch = Arch::kMlp;
  std::vector<std::size_t> hidden;  // empty = architecture default
  double dropout_rate = 0.3;
  TrainConfig train;

  ConfidNetConfig confidnet;
  McDropoutConfig mcdropout;
  TrustScoreSettings trustscore;
  std::vector<std::string> metrics;  // subset of the four canonical names

  nlohmann::json effective;
  std::string hash;
};

/// Validates the raw JSON against the schema — unknown keys are rejected
/// with their dotted path — applies defaults and the overrides, and stamps
/// the canonical form + hash.
ExperimentConfig parse_config(const nlohmann::json& raw,
                              std::optional<std::uint64_t> seed_override = {},
                              std::optional<std::filesystem::path> out_override = {});
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  std::optional<std::uint64_t> seed_override = {},
                                  std::optional<std::filesystem::path> out_override = {});

/// Loads or synthesizes the dataset and splits it deterministically.
Folds prepare_data(const ExperimentConfig& config);

/// ClassifierSpec completed with the dataset's input shape.
ClassifierSpec classifier_spec(const ExperimentConfig& config, const Folds& folds);

// ---- pipeline stages (pure compute; the cmd_* wrappers do the I/O) -------

TrainedClassifier stage_train(const ExperimentConfig& config, const Folds& folds);

struct ConfidNetResult {
  ConfidencePredictor predictor;
  double phase1_aupr_error = 0.0;  // on the test fold
  double phase2_aupr_error = 0.0;  // equals phase1 value when phase 2 is off
};
ConfidNetResult stage_confidnet(const ExperimentConfig& config, const Folds& folds,
                                const TrainedClassifier& classifier);

struct EvalResult {
  nlohmann::json report;
  // Per-method test outcomes in report order, for CSV emission and plots.
  std::vector<std::pair<std::string, std::vector<ScoredOutcome>>> outcomes;
};
EvalResult stage_eval(const ExperimentConfig& config, const Folds& folds,
                      const TrainedClassifier& classifier,
                      const ConfidencePredictor& predictor);

nlohmann::json stage_ablate(const ExperimentConfig& config, const Folds& folds,
                            const TrainedClassifier& classifier);

// ---- command wrappers: run a stage and persist its artifacts -------------

std::filesystem::path cmd_train(const ExperimentConfig& config);
std::filesystem::path cmd_confidnet(const ExperimentConfig& config,
                                    std::optional<std::filesystem::path> classifier_path = {});
std::filesystem::path cmd_eval(const ExperimentConfig& config,
                               std::optional<std::filesystem::path> classifier_path = {},
                               std::optional<std::filesystem::path> predictor_path = {});
std::filesystem::path cmd_ablate(const ExperimentConfig& config,
                                 std::optional<std::filesystem::path> classifier_path = {});

/// Strips every wall-clock field; what remains must be byte-identical across
/// reruns with the same config and seed.
nlohmann::json report_without_wall_clock(nlohmann::json report);

}  // namespace confbench

#endif  // CONFBENCH_EXPERIMENT_HPP
