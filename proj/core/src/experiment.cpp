#include "confbench/experiment.hpp"

#include <chrono>
#include <fstream>
#include <initializer_list>
#include <string_view>
#include <utility>

#include "confbench/checkpoint.hpp"
#include "confbench/criteria.hpp"
#include "confbench/digest.hpp"
#include "confbench/errors.hpp"
#include "confbench/idx.hpp"

namespace confbench {

namespace {

using nlohmann::json;

// ---- schema validation helpers -------------------------------------------

const json& require_object(const json& value, const std::string& path) {
  if (!value.is_object()) {
    throw ConfigError("config: " + path + " must be an object");
  }
  return value;
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("config: unknown key " + (path.empty() ? key : path + "." + key));
    }
  }
}

std::string key_path(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

double take_number(const json& obj, const char* key, double fallback,
                   const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw ConfigError("config: " + key_path(path, key) + " must be a number");
  }
  return obj[key].get<double>();
}

std::int64_t take_int(const json& obj, const char* key, std::int64_t fallback,
                      const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError("config: " + key_path(path, key) + " must be an integer");
  }
  return obj[key].get<std::int64_t>();
}

std::string take_string(const json& obj, const char* key, const std::string& fallback,
                        const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) {
    throw ConfigError("config: " + key_path(path, key) + " must be a string");
  }
  return obj[key].get<std::string>();
}

bool take_bool(const json& obj, const char* key, bool fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) {
    throw ConfigError("config: " + key_path(path, key) + " must be a boolean");
  }
  return obj[key].get<bool>();
}

OptimizerSettings take_optimizer(const json& parent, const char* key,
                                 OptimizerSettings fallback, const std::string& path) {
  if (!parent.contains(key)) return fallback;
  const std::string sub = key_path(path, key);
  const json& obj = require_object(parent[key], sub);
  reject_unknown_keys(obj, sub,
                      {"kind", "learning_rate", "momentum", "beta1", "beta2", "epsilon"});
  OptimizerSettings settings = fallback;
  settings.kind = take_string(obj, "kind", settings.kind, sub);
  settings.learning_rate = take_number(obj, "learning_rate", settings.learning_rate, sub);
  settings.momentum = take_number(obj, "momentum", settings.momentum, sub);
  settings.beta1 = take_number(obj, "beta1", settings.beta1, sub);
  settings.beta2 = take_number(obj, "beta2", settings.beta2, sub);
  settings.epsilon = take_number(obj, "epsilon", settings.epsilon, sub);
  return settings;
}

json optimizer_json(const OptimizerSettings& settings) {
  return {{"kind", settings.kind},
          {"learning_rate", settings.learning_rate},
          {"momentum", settings.momentum},
          {"beta1", settings.beta1},
          {"beta2", settings.beta2},
          {"epsilon", settings.epsilon}};
}

PhaseSchedule take_schedule(const json& parent, const char* key, PhaseSchedule fallback,
                            const std::string& path,
                            std::initializer_list<std::string_view> extra_allowed) {
  if (!parent.contains(key)) return fallback;
  const std::string sub = key_path(path, key);
  const json& obj = require_object(parent[key], sub);
  std::vector<std::string_view> allowed = {"max_epochs", "patience", "batch_size"};
  allowed.insert(allowed.end(), extra_allowed.begin(), extra_allowed.end());
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (std::string_view name : allowed) known |= k == name;
    if (!known) throw ConfigError("config: unknown key " + sub + "." + k);
  }
  PhaseSchedule schedule = fallback;
  schedule.max_epochs = static_cast<int>(take_int(obj, "max_epochs", schedule.max_epochs, sub));
  schedule.patience = static_cast<int>(take_int(obj, "patience", schedule.patience, sub));
  schedule.batch_size = static_cast<std::size_t>(
      take_int(obj, "batch_size", static_cast<std::int64_t>(schedule.batch_size), sub));
  return schedule;
}

const std::vector<std::string> kCanonicalMetrics = {"fpr_at_95_tpr", "aupr_error",
                                                    "aupr_success", "auroc"};

double compute_metric(const std::string& name, std::span<const ScoredOutcome> outcomes) {
  if (name == "fpr_at_95_tpr") return fpr_at_95_tpr(outcomes);
  if (name == "aupr_error") return aupr(outcomes, PositiveClass::kError);
  if (name == "aupr_success") return aupr(outcomes, PositiveClass::kSuccess);
  if (name == "auroc") return auroc(outcomes);
  throw ConfigError("config: unknown metric '" + name + "'");
}

Tensor flatten_rows(const Tensor& features) {
  return Tensor({features.dim(0), features.cols()}, features.data);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << value.dump(2) << "\n";
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& err) {
    throw FormatError(path.string() + ": " + err.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& raw,
                              std::optional<std::uint64_t> seed_override,
                              std::optional<std::filesystem::path> out_override) {
  const json& root = require_object(raw, "root");
  reject_unknown_keys(root, "",
                      {"schema_version", "seed", "output_dir", "dataset", "classifier",
                       "confidnet", "baselines", "metrics"});

  const auto version = take_int(root, "schema_version", kConfigSchemaVersion, "");
  if (version != kConfigSchemaVersion) {
    throw ConfigError("config: schema_version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kConfigSchemaVersion) +
                      ")");
  }

  ExperimentConfig config;
  const auto seed = take_int(root, "seed", 1, "");
  if (seed < 0) throw ConfigError("config: seed must be nonnegative");
  config.seed = static_cast<std::uint64_t>(seed);
  config.output_dir = take_string(root, "output_dir", "runs/out", "");

  if (root.contains("dataset")) {
    const json& d = require_object(root["dataset"], "dataset");
    reject_unknown_keys(d, "dataset",
                        {"kind", "mnist_dir", "classes", "per_class", "dim", "spread",
                         "train_fraction", "val_fraction", "standardize"});
    DatasetConfig& ds = config.dataset;
    ds.kind = take_string(d, "kind", ds.kind, "dataset");
    if (ds.kind != "synth-blobs" && ds.kind != "mnist") {
      throw ConfigError("config: dataset.kind must be synth-blobs | mnist, got '" + ds.kind +
                        "'");
    }
    ds.mnist_dir = take_string(d, "mnist_dir", ds.mnist_dir.string(), "dataset");
    ds.classes = static_cast<int>(take_int(d, "classes", ds.classes, "dataset"));
    ds.per_class = static_cast<int>(take_int(d, "per_class", ds.per_class, "dataset"));
    ds.dim = static_cast<int>(take_int(d, "dim", ds.dim, "dataset"));
    ds.spread = take_number(d, "spread", ds.spread, "dataset");
    ds.train_fraction = take_number(d, "train_fraction", ds.train_fraction, "dataset");
    ds.val_fraction = take_number(d, "val_fraction", ds.val_fraction, "dataset");
    ds.standardize = take_bool(d, "standardize", ds.standardize, "dataset");
  }

  if (root.contains("classifier")) {
    const json& c = require_object(root["classifier"], "classifier");
    reject_unknown_keys(c, "classifier",
                        {"arch", "hidden", "dropout_rate", "max_epochs", "patience",
                         "batch_size", "optimizer"});
    config.arch = arch_from_string(take_string(c, "arch", arch_to_string(config.arch),
                                               "classifier"));
    if (c.contains("hidden")) {
      if (!c["hidden"].is_array()) {
        throw ConfigError("config: classifier.hidden must be an array of integers");
      }
      config.hidden.clear();
      for (const auto& h : c["hidden"]) {
        if (!h.is_number_integer() || h.get<std::int64_t>() < 1) {
          throw ConfigError("config: classifier.hidden entries must be positive integers");
        }
        config.hidden.push_back(h.get<std::size_t>());
      }
    }
    config.dropout_rate = take_number(c, "dropout_rate", config.dropout_rate, "classifier");
    config.train.max_epochs =
        static_cast<int>(take_int(c, "max_epochs", config.train.max_epochs, "classifier"));
    config.train.patience =
        static_cast<int>(take_int(c, "patience", config.train.patience, "classifier"));
    config.train.batch_size = static_cast<std::size_t>(take_int(
        c, "batch_size", static_cast<std::int64_t>(config.train.batch_size), "classifier"));
    config.train.optimizer =
        take_optimizer(c, "optimizer", config.train.optimizer, "classifier");
  }

  if (root.contains("confidnet")) {
    const json& c = require_object(root["confidnet"], "confidnet");
    reject_unknown_keys(c, "confidnet",
                        {"target", "loss", "training_fold", "holdout_fraction", "optimizer",
                         "focal_gamma", "ranking_margin", "phase1", "phase2"});
    ConfidNetConfig& cn = config.confidnet;
    cn.target_kind =
        target_from_string(take_string(c, "target", target_to_string(cn.target_kind),
                                       "confidnet"));
    cn.loss_kind =
        loss_from_string(take_string(c, "loss", loss_to_string(cn.loss_kind), "confidnet"));
    cn.training_fold = fold_from_string(
        take_string(c, "training_fold", fold_to_string(cn.training_fold), "confidnet"));
    cn.holdout_fraction = take_number(c, "holdout_fraction", cn.holdout_fraction, "confidnet");
    cn.optimizer = take_optimizer(c, "optimizer", cn.optimizer, "confidnet");
    cn.focal_gamma = take_number(c, "focal_gamma", cn.focal_gamma, "confidnet");
    cn.ranking_margin = take_number(c, "ranking_margin", cn.ranking_margin, "confidnet");
    cn.phase1 = take_schedule(c, "phase1", cn.phase1, "confidnet", {});
    if (c.contains("phase2")) {
      const json& p2 = require_object(c["phase2"], "confidnet.phase2");
      reject_unknown_keys(p2, "confidnet.phase2",
                          {"enabled", "learning_rate_factor", "train_head", "max_epochs",
                           "patience", "batch_size"});
      cn.phase2_enabled = take_bool(p2, "enabled", cn.phase2_enabled, "confidnet.phase2");
      cn.phase2_lr_factor = take_number(p2, "learning_rate_factor", cn.phase2_lr_factor,
                                        "confidnet.phase2");
      cn.phase2_train_head =
          take_bool(p2, "train_head", cn.phase2_train_head, "confidnet.phase2");
      cn.phase2.max_epochs = static_cast<int>(
          take_int(p2, "max_epochs", cn.phase2.max_epochs, "confidnet.phase2"));
      cn.phase2.patience = static_cast<int>(
          take_int(p2, "patience", cn.phase2.patience, "confidnet.phase2"));
      cn.phase2.batch_size = static_cast<std::size_t>(take_int(
          p2, "batch_size", static_cast<std::int64_t>(cn.phase2.batch_size),
          "confidnet.phase2"));
    }
  }

  if (root.contains("baselines")) {
    const json& b = require_object(root["baselines"], "baselines");
    reject_unknown_keys(b, "baselines", {"mcdropout", "trustscore"});
    if (b.contains("mcdropout")) {
      const json& m = require_object(b["mcdropout"], "baselines.mcdropout");
      reject_unknown_keys(m, "baselines.mcdropout", {"passes"});
      config.mcdropout.passes = static_cast<int>(
          take_int(m, "passes", config.mcdropout.passes, "baselines.mcdropout"));
    }
    if (b.contains("trustscore")) {
      const json& t = require_object(b["trustscore"], "baselines.trustscore");
      reject_unknown_keys(t, "baselines.trustscore", {"k", "alpha", "space", "backend"});
      config.trustscore.config.k = static_cast<int>(
          take_int(t, "k", config.trustscore.config.k, "baselines.trustscore"));
      config.trustscore.config.alpha =
          take_number(t, "alpha", config.trustscore.config.alpha, "baselines.trustscore");
      config.trustscore.space =
          take_string(t, "space", config.trustscore.space, "baselines.trustscore");
      if (config.trustscore.space != "features" && config.trustscore.space != "input") {
        throw ConfigError("config: baselines.trustscore.space must be features | input");
      }
      config.trustscore.config.backend = trustscore_backend_from_string(
          take_string(t, "backend", "auto", "baselines.trustscore"));
    }
  }

  config.metrics = kCanonicalMetrics;
  if (root.contains("metrics")) {
    if (!root["metrics"].is_array() || root["metrics"].empty()) {
      throw ConfigError("config: metrics must be a nonempty array of metric names");
    }
    config.metrics.clear();
    for (const auto& m : root["metrics"]) {
      if (!m.is_string()) throw ConfigError("config: metrics entries must be strings");
      const std::string name = m.get<std::string>();
      bool known = false;
      for (const std::string& canonical : kCanonicalMetrics) known |= name == canonical;
      if (!known) throw ConfigError("config: unknown metric '" + name + "'");
      config.metrics.push_back(name);
    }
  }

  if (seed_override) config.seed = *seed_override;
  if (out_override) config.output_dir = *out_override;

  // Semantic validation via the module-level checks.
  config.confidnet.seed = derive_seed(config.seed, "confidnet");
  config.confidnet.validate();
  config.mcdropout.seed = derive_seed(config.seed, "mcdropout");
  if (config.mcdropout.passes < 1) throw ConfigError("config: mcdropout passes must be >= 1");
  if (config.dataset.kind == "synth-blobs") {
    if (config.dataset.classes < 2) throw ConfigError("config: dataset.classes must be >= 2");
    if (config.dataset.per_class < 1) {
      throw ConfigError("config: dataset.per_class must be >= 1");
    }
    if (config.dataset.dim < 1) throw ConfigError("config: dataset.dim must be >= 1");
  }
  if (config.hidden.empty()) {
    config.hidden = config.arch == Arch::kMlp ? std::vector<std::size_t>{256}
                                              : std::vector<std::size_t>{128};
  }

  // Canonical expanded form; nlohmann objects keep keys sorted, so dumping
  // this is deterministic.
  json effective;
  effective["schema_version"] = kConfigSchemaVersion;
  effective["seed"] = config.seed;
  effective["output_dir"] = config.output_dir.string();
  effective["dataset"] = {{"kind", config.dataset.kind},
                          {"mnist_dir", config.dataset.mnist_dir.string()},
                          {"classes", config.dataset.classes},
                          {"per_class", config.dataset.per_class},
                          {"dim", config.dataset.dim},
                          {"spread", config.dataset.spread},
                          {"train_fraction", config.dataset.train_fraction},
                          {"val_fraction", config.dataset.val_fraction},
                          {"standardize", config.dataset.standardize}};
  effective["classifier"] = {{"arch", arch_to_string(config.arch)},
                             {"hidden", config.hidden},
                             {"dropout_rate", config.dropout_rate},
                             {"max_epochs", config.train.max_epochs},
                             {"patience", config.train.patience},
                             {"batch_size", config.train.batch_size},
                             {"optimizer", optimizer_json(config.train.optimizer)}};
  effective["confidnet"] = {
      {"target", target_to_string(config.confidnet.target_kind)},
      {"loss", loss_to_string(config.confidnet.loss_kind)},
      {"training_fold", fold_to_string(config.confidnet.training_fold)},
      {"holdout_fraction", config.confidnet.holdout_fraction},
      {"optimizer", optimizer_json(config.confidnet.optimizer)},
      {"focal_gamma", config.confidnet.focal_gamma},
      {"ranking_margin", config.confidnet.ranking_margin},
      {"phase1",
       {{"max_epochs", config.confidnet.phase1.max_epochs},
        {"patience", config.confidnet.phase1.patience},
        {"batch_size", config.confidnet.phase1.batch_size}}},
      {"phase2",
       {{"enabled", config.confidnet.phase2_enabled},
        {"learning_rate_factor", config.confidnet.phase2_lr_factor},
        {"train_head", config.confidnet.phase2_train_head},
        {"max_epochs", config.confidnet.phase2.max_epochs},
        {"patience", config.confidnet.phase2.patience},
        {"batch_size", config.confidnet.phase2.batch_size}}}};
  effective["baselines"] = {
      {"mcdropout", {{"passes", config.mcdropout.passes}}},
      {"trustscore",
       {{"k", config.trustscore.config.k},
        {"alpha", config.trustscore.config.alpha},
        {"space", config.trustscore.space},
        {"backend", config.trustscore.config.backend == TrustScoreBackend::kBrute ? "brute"
                    : config.trustscore.config.backend == TrustScoreBackend::kKdTree
                        ? "kdtree"
                        : "auto"}}}};
  effective["metrics"] = config.metrics;

  config.effective = std::move(effective);
  config.hash = sha256_hex(config.effective.dump());
  return config;
}

ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  std::optional<std::uint64_t> seed_override,
                                  std::optional<std::filesystem::path> out_override) {
  return parse_config(load_json_file(path), seed_override, out_override);
}

Folds prepare_data(const ExperimentConfig& config) {
  const DatasetConfig& ds = config.dataset;
  if (ds.kind == "mnist") {
    LabeledDataset full = load_idx_dataset(ds.mnist_dir / "train-images-idx3-ubyte",
                                           ds.mnist_dir / "train-labels-idx1-ubyte", "mnist",
                                           10);
    SplitSpec spec;
    spec.train_fraction = 1.0 - ds.val_fraction;
    spec.val_fraction = ds.val_fraction;
    spec.seed = derive_seed(config.seed, "split");
    Folds folds = split(full, spec);
    folds.test = load_idx_dataset(ds.mnist_dir / "t10k-images-idx3-ubyte",
                                  ds.mnist_dir / "t10k-labels-idx1-ubyte", "mnist-test", 10);
    if (ds.standardize) {
      const Standardizer stats = Standardizer::fit(folds.train.features);
      stats.apply(folds.train.features);
      stats.apply(folds.val.features);
      stats.apply(folds.test.features);
    }
    return folds;
  }

  LabeledDataset blobs = synth_blobs(ds.classes, ds.per_class, ds.dim, ds.spread,
                                     derive_seed(config.seed, "data"));
  SplitSpec spec;
  spec.train_fraction = ds.train_fraction;
  spec.val_fraction = ds.val_fraction;
  spec.seed = derive_seed(config.seed, "split");
  Folds folds = split(blobs, spec);
  if (ds.standardize) {
    const Standardizer stats = Standardizer::fit(folds.train.features);
    stats.apply(folds.train.features);
    stats.apply(folds.val.features);
    stats.apply(folds.test.features);
  }
  return folds;
}

ClassifierSpec classifier_spec(const ExperimentConfig& config, const Folds& folds) {
  ClassifierSpec spec;
  spec.arch = config.arch;
  spec.hidden = config.hidden;
  spec.num_classes = folds.train.num_classes;
  spec.dropout_rate = config.dropout_rate;
  spec.input_shape.assign(folds.train.features.shape.begin() + 1,
                          folds.train.features.shape.end());
  return spec;
}

TrainedClassifier stage_train(const ExperimentConfig& config, const Folds& folds) {
  TrainConfig train = config.train;
  train.seed = derive_seed(config.seed, "classifier");
  return train_classifier(classifier_spec(config, folds), folds.train, folds.val, train);
}

namespace {

std::vector<ScoredOutcome> to_outcomes(const std::vector<double>& confidences,
                                       const std::vector<bool>& is_error) {
  std::vector<ScoredOutcome> outcomes(confidences.size());
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    outcomes[i] = {confidences[i], is_error[i]};
  }
  return outcomes;
}

double test_aupr_error(const ExperimentConfig& config, const Folds& folds,
                       const TrainedClassifier& classifier,
                       const ConfidencePredictor& predictor) {
  const Prediction prediction = classifier.predict(folds.test.features);
  std::vector<bool> is_error(prediction.size());
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    is_error[i] = prediction.predicted[i] != folds.test.labels[i];
  }
  const std::vector<double> scores = predictor.confidence(folds.test.features);
  return aupr(to_outcomes(scores, is_error), PositiveClass::kError);
}

const LabeledDataset& head_fold(const ConfidNetConfig& config, const Folds& folds) {
  return config.training_fold == TrainingFold::kVal ? folds.val : folds.train;
}

}  // namespace

ConfidNetResult stage_confidnet(const ExperimentConfig& config, const Folds& folds,
                                const TrainedClassifier& classifier) {
  ConfidNetResult result{train_head(classifier, head_fold(config.confidnet, folds), config.confidnet)};
  result.phase1_aupr_error = test_aupr_error(config, folds, classifier, result.predictor);
  result.phase2_aupr_error = result.phase1_aupr_error;
  if (config.confidnet.phase2_enabled) {
    finetune_encoder(result.predictor, head_fold(config.confidnet, folds), config.confidnet);
    result.phase2_aupr_error = test_aupr_error(config, folds, classifier, result.predictor);
  }
  return result;
}

EvalResult stage_eval(const ExperimentConfig& config, const Folds& folds,
                      const TrainedClassifier& classifier,
                      const ConfidencePredictor& predictor) {
  const auto start = std::chrono::steady_clock::now();
  const LabeledDataset& test = folds.test;

  const Prediction prediction = classifier.predict(test.features);
  std::vector<bool> is_error(prediction.size());
  std::size_t errors = 0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    is_error[i] = prediction.predicted[i] != test.labels[i];
    errors += is_error[i] ? 1 : 0;
  }
  const double test_accuracy =
      1.0 - static_cast<double>(errors) / static_cast<double>(prediction.size());

  const GuaranteeReport guarantees = check_guarantees(prediction, test.labels);

  EvalResult result;
  result.outcomes.emplace_back("mcp", to_outcomes(prediction.mcp, is_error));

  McDropoutScorer mc(classifier, config.mcdropout);
  result.outcomes.emplace_back("mcdropout", to_outcomes(mc.scores(test.features), is_error));

  {
    const bool feature_space = config.trustscore.space == "features";
    const Tensor fit_points = feature_space
                                  ? classifier.penultimate_features(folds.train.features)
                                  : flatten_rows(folds.train.features);
    const Tensor queries = feature_space ? classifier.penultimate_features(test.features)
                                         : flatten_rows(test.features);
    const TrustScoreIndex index = TrustScoreIndex::fit(
        fit_points, folds.train.labels, folds.train.num_classes, config.trustscore.config);
    result.outcomes.emplace_back("trustscore",
                                 to_outcomes(index.scores(queries, prediction.predicted),
                                             is_error));
  }

  result.outcomes.emplace_back("confidnet",
                               to_outcomes(predictor.confidence(test.features), is_error));

  json methods = json::array();
  for (const auto& [name, outcomes] : result.outcomes) {
    json metric_values;
    for (const std::string& metric : config.metrics) {
      metric_values[metric] = compute_metric(metric, outcomes);
    }
    json rc = json::array();
    for (const RiskCoveragePoint& point : risk_coverage(outcomes)) {
      rc.push_back({{"threshold", point.threshold},
                    {"coverage", point.coverage},
                    {"selective_risk", point.selective_risk}});
    }
    methods.push_back({{"name", name}, {"metrics", metric_values}, {"risk_coverage", rc}});
  }

  json report;
  report["schema_version"] = kConfigSchemaVersion;
  report["config_hash"] = config.hash;
  report["seed"] = config.seed;
  report["dataset"] = {{"kind", config.dataset.kind},
                       {"train_size", folds.train.size()},
                       {"val_size", folds.val.size()},
                       {"test_size", folds.test.size()},
                       {"classes", folds.train.num_classes}};
  report["accuracy"] = test_accuracy;
  report["methods"] = methods;
  report["guarantees"] = {{"violations", guarantees.violations},
                          {"total", guarantees.total},
                          {"overlap_count", guarantees.overlap_count},
                          {"overlap_errors", guarantees.overlap_errors},
                          {"overlap_successes", guarantees.overlap_successes},
                          {"overlap_mass", guarantees.overlap_mass()}};
  report["confidnet_phase"] = predictor.phase;
  report["wall_clock_seconds"] = elapsed_seconds(start);
  result.report = std::move(report);
  return result;
}

nlohmann::json stage_ablate(const ExperimentConfig& config, const Folds& folds,
                            const TrainedClassifier& classifier) {
  const auto run_variant = [&](const ConfidNetConfig& variant,
                               const Folds& variant_folds) -> std::pair<double, double> {
    ConfidencePredictor predictor =
        train_head(classifier, head_fold(variant, variant_folds), variant);
    const double phase1 = test_aupr_error(config, variant_folds, classifier, predictor);
    double phase2 = phase1;
    if (variant.phase2_enabled) {
      finetune_encoder(predictor, head_fold(variant, variant_folds), variant);
      phase2 = test_aupr_error(config, variant_folds, classifier, predictor);
    }
    return {phase1, phase2};
  };

  json axes;

  {  // learning scheme: head-only vs fine-tuned encoder
    ConfidNetConfig variant = config.confidnet;
    variant.phase2_enabled = true;
    const auto [phase1, phase2] = run_variant(variant, folds);
    axes["scheme"] = json::array({{{"variant", "phase1"}, {"aupr_error", phase1}},
                                  {{"variant", "phase2"}, {"aupr_error", phase2}}});
  }

  {  // training fold: train set vs the 10% validation split
    json rows = json::array();
    for (const TrainingFold fold : {TrainingFold::kTrain, TrainingFold::kVal}) {
      ConfidNetConfig variant = config.confidnet;
      variant.training_fold = fold;
      const Folds* variant_folds = &folds;
      Folds resplit;
      if (fold == TrainingFold::kVal && config.dataset.val_fraction != 0.1) {
        ExperimentConfig adjusted = config;
        adjusted.dataset.val_fraction = 0.1;
        resplit = prepare_data(adjusted);
        variant_folds = &resplit;
      }
      const auto [phase1, phase2] = run_variant(variant, *variant_folds);
      rows.push_back({{"variant", fold_to_string(fold)},
                      {"aupr_error", config.confidnet.phase2_enabled ? phase2 : phase1}});
    }
    axes["fold"] = rows;
  }

  {  // loss, with targets adjusted to keep the pairing rules satisfied
    json rows = json::array();
    for (const LossKind loss :
         {LossKind::kMse, LossKind::kBce, LossKind::kFocal, LossKind::kRanking}) {
      ConfidNetConfig variant = config.confidnet;
      variant.loss_kind = loss;
      if (loss == LossKind::kBce || loss == LossKind::kFocal) {
        variant.target_kind = TargetKind::kBinaryCorrectness;
      } else if (loss == LossKind::kMse &&
                 variant.target_kind == TargetKind::kBinaryCorrectness) {
        variant.target_kind = TargetKind::kTcp;
      }
      const auto [phase1, phase2] = run_variant(variant, folds);
      rows.push_back({{"variant", loss_to_string(loss)},
                      {"target", target_to_string(variant.target_kind)},
                      {"aupr_error", config.confidnet.phase2_enabled ? phase2 : phase1}});
    }
    axes["loss"] = rows;
  }

  {  // confidence criterion: tcp vs its mcp-normalized variant
    json rows = json::array();
    for (const TargetKind target : {TargetKind::kTcp, TargetKind::kTcpRatio}) {
      ConfidNetConfig variant = config.confidnet;
      variant.target_kind = target;
      variant.loss_kind = LossKind::kMse;
      const auto [phase1, phase2] = run_variant(variant, folds);
      rows.push_back({{"variant", target_to_string(target)},
                      {"aupr_error", config.confidnet.phase2_enabled ? phase2 : phase1}});
    }
    axes["criterion"] = rows;
  }

  json report;
  report["schema_version"] = kConfigSchemaVersion;
  report["config_hash"] = config.hash;
  report["seed"] = config.seed;
  report["axes"] = axes;
  return report;
}

// ---- command wrappers -----------------------------------------------------

namespace {

std::filesystem::path ensure_output_dir(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  return config.output_dir;
}

TrainedClassifier load_classifier_for(const ExperimentConfig& config,
                                      const std::optional<std::filesystem::path>& path) {
  const std::filesystem::path resolved =
      path.value_or(config.output_dir / "classifier.json");
  if (!std::filesystem::exists(resolved)) {
    throw DependencyError("missing classifier checkpoint " + resolved.string() +
                          "; run `confbench train` first");
  }
  return load_classifier(resolved);
}

}  // namespace

std::filesystem::path cmd_train(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path out = ensure_output_dir(config);
  const Folds folds = prepare_data(config);
  const TrainedClassifier model = stage_train(config, folds);

  const std::filesystem::path checkpoint = out / "classifier.json";
  save_classifier(model, checkpoint);

  json summary;
  summary["config_hash"] = config.hash;
  summary["seed"] = config.seed;
  summary["checkpoint"] = checkpoint.string();
  summary["parameter_sha256"] = model.parameter_hash();
  summary["epochs_run"] = model.log.size();
  summary["final_train_loss"] = model.log.empty() ? 0.0 : model.log.back().train_loss;
  summary["final_val_accuracy"] = model.log.empty() ? 0.0 : model.log.back().val_accuracy;
  summary["wall_clock_seconds"] = elapsed_seconds(start);
  write_json_file(out / "train_summary.json", summary);
  return checkpoint;
}

std::filesystem::path cmd_confidnet(const ExperimentConfig& config,
                                    std::optional<std::filesystem::path> classifier_path) {
  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path out = ensure_output_dir(config);
  const Folds folds = prepare_data(config);
  const TrainedClassifier classifier = load_classifier_for(config, classifier_path);
  const ConfidNetResult result = stage_confidnet(config, folds, classifier);

  const std::filesystem::path checkpoint = out / "confidnet.json";
  save_predictor(result.predictor, checkpoint);

  json summary;
  summary["config_hash"] = config.hash;
  summary["seed"] = config.seed;
  summary["checkpoint"] = checkpoint.string();
  summary["phase"] = result.predictor.phase;
  summary["phase1_aupr_error"] = result.phase1_aupr_error;
  summary["phase2_aupr_error"] = result.phase2_aupr_error;
  summary["wall_clock_seconds"] = elapsed_seconds(start);
  write_json_file(out / "confidnet_summary.json", summary);
  return checkpoint;
}

std::filesystem::path cmd_eval(const ExperimentConfig& config,
                               std::optional<std::filesystem::path> classifier_path,
                               std::optional<std::filesystem::path> predictor_path) {
  const std::filesystem::path out = ensure_output_dir(config);
  const Folds folds = prepare_data(config);
  const TrainedClassifier classifier = load_classifier_for(config, classifier_path);

  const std::filesystem::path predictor_file =
      predictor_path.value_or(config.output_dir / "confidnet.json");
  if (!std::filesystem::exists(predictor_file)) {
    throw DependencyError("missing confidnet checkpoint " + predictor_file.string() +
                          "; run `confbench confidnet` first");
  }
  const ConfidencePredictor predictor = load_predictor(predictor_file, classifier);

  const EvalResult result = stage_eval(config, folds, classifier, predictor);
  const std::filesystem::path report_path = out / "report.json";
  write_json_file(report_path, result.report);
  for (const auto& [name, outcomes] : result.outcomes) {
    write_outcomes_csv(out / ("outcomes_" + name + ".csv"), outcomes);
  }
  return report_path;
}

std::filesystem::path cmd_ablate(const ExperimentConfig& config,
                                 std::optional<std::filesystem::path> classifier_path) {
  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path out = ensure_output_dir(config);
  const Folds folds = prepare_data(config);
  const TrainedClassifier classifier = load_classifier_for(config, classifier_path);

  json report = stage_ablate(config, folds, classifier);
  report["wall_clock_seconds"] = elapsed_seconds(start);
  const std::filesystem::path report_path = out / "ablation.json";
  write_json_file(report_path, report);

  for (const auto& [axis, rows] : report["axes"].items()) {
    std::ofstream csv(out / ("ablation_" + axis + ".csv"));
    if (!csv) throw IoError("cannot write ablation CSV for axis " + axis);
    csv << "variant,aupr_error\n";
    for (const auto& row : rows) {
      csv << row["variant"].get<std::string>() << "," << row["aupr_error"].get<double>()
          << "\n";
    }
  }
  return report_path;
}

nlohmann::json report_without_wall_clock(nlohmann::json report) {
  report.erase("wall_clock_seconds");
  return report;
}

}  // namespace confbench
