#ifndef CONFBENCH_CHECKPOINT_HPP
#define CONFBENCH_CHECKPOINT_HPP

#include <filesystem>
#include <vector>

#include "confbench/classifier.hpp"
#include "confbench/tensor.hpp"
#include "vendor/json.hpp"

namespace confbench {

/// Checkpoints are a JSON manifest plus a raw little-endian float32 blob in
/// a sibling `.bin` file. The manifest records tensor shapes in order and
/// the blob's length and SHA-256, so truncation and corruption are detected
/// on load.
inline constexpr const char* kCheckpointMagic = "confbench-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct CheckpointPayload {
  nlohmann::json manifest;
  std::vector<float> blob;
};

/// Writes `manifest` (caller supplies the kind-specific fields) with the
/// magic/version/tensors/blob bookkeeping added, plus the blob file.
void write_checkpoint(const std::filesystem::path& manifest_path, nlohmann::json manifest,
                      const std::vector<Tensor*>& tensors);

/// Reads and validates magic, version, blob length and digest.
CheckpointPayload read_checkpoint(const std::filesystem::path& manifest_path);

/// Pours blob values into the parameter tensors in order; throws FormatError
/// when the counts disagree with the manifest's tensor shapes.
void fill_parameters(const std::vector<Tensor*>& params, const CheckpointPayload& payload);

void save_classifier(const TrainedClassifier& model, const std::filesystem::path& path);
TrainedClassifier load_classifier(const std::filesystem::path& path);

}  // namespace confbench

#endif  // CONFBENCH_CHECKPOINT_HPP
