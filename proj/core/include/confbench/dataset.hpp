#ifndef CONFBENCH_DATASET_HPP
#define CONFBENCH_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "confbench/rng.hpp"
#include "confbench/tensor.hpp"

namespace confbench {

/// Where a dataset came from: either files (path + SHA-256 each) or a
/// generator spec with its seed. Recorded in reports.
struct Provenance {
  struct File {
    std::string path;
    std::string sha256;
  };
  std::vector<File> files;
  std::string generator;  // empty for file-backed datasets
  std::uint64_t seed = 0;
};

struct LabeledDataset {
  Tensor features;  // [N x d] or [N x C x H x W]
  std::vector<int> labels;
  int num_classes = 0;
  std::string name;
  Provenance provenance;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  /// Feature width per sample (product of non-batch dimensions).
  std::size_t feature_size() const { return features.cols(); }

  void validate() const;  // N == |labels|, labels in [0, K), N >= 1
};

/// Loads an image + label IDX pair into one dataset (pixels already scaled
/// to [0, 1]); provenance records both files with checksums.
LabeledDataset load_idx_dataset(const std::filesystem::path& images,
                                const std::filesystem::path& labels,
                                const std::string& name, int num_classes = 10);

/// K isotropic Gaussian clusters in d dimensions. Cluster k is centered at
/// distance k along the first axis (unit spacing), with standard deviation
/// `spread` in every coordinate; larger spread raises the Bayes error.
LabeledDataset synth_blobs(int num_classes, int per_class, int dim, double spread,
                           std::uint64_t seed);

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;  // remainder goes to the test fold
  std::uint64_t seed = 0;

  void validate() const;
};

struct Folds {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

/// Deterministic partition by a seeded permutation: the three folds are
/// disjoint and cover the dataset exactly.
Folds split(const LabeledDataset& dataset, const SplitSpec& spec);

/// Copies the selected rows into a new dataset (provenance preserved).
LabeledDataset gather(const LabeledDataset& dataset, const std::vector<std::size_t>& indices);

/// Copies the selected rows of a feature tensor.
Tensor gather_rows(const Tensor& features, const std::vector<std::size_t>& indices);

/// Shuffles [0, n) with the seed and chops into batches of `batch_size`
/// (the last batch may be short). Every index appears exactly once.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t shuffle_seed);

/// Optional per-channel (images) or per-dataset (flat features)
/// standardization fitted on one fold and applied to others.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const Tensor& features);
  void apply(Tensor& features) const;
};

/// Random integer translation of each image by up to `max_shift` pixels in
/// both axes, zero-filled. Training-time augmentation for [N x C x H x W].
Tensor shift_augment(const Tensor& images, int max_shift, Rng& rng);

}  // namespace confbench

#endif  // CONFBENCH_DATASET_HPP
