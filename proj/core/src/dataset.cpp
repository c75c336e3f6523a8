#include "confbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "confbench/digest.hpp"
#include "confbench/errors.hpp"
#include "confbench/idx.hpp"

namespace confbench {

void LabeledDataset::validate() const {
  if (labels.empty()) {
    throw ConfigError("dataset '" + name + "' is empty");
  }
  if (features.rows() != labels.size()) {
    throw ShapeError("dataset '" + name + "': " + std::to_string(features.rows()) +
                     " feature rows vs " + std::to_string(labels.size()) + " labels");
  }
  if (num_classes < 2) {
    throw ConfigError("dataset '" + name + "': need at least 2 classes");
  }
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw IndexError("dataset '" + name + "': label " + std::to_string(label) +
                       " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

LabeledDataset load_idx_dataset(const std::filesystem::path& images,
                                const std::filesystem::path& labels,
                                const std::string& name, int num_classes) {
  LabeledDataset dataset;
  dataset.features = parse_idx_images(images);
  dataset.labels = parse_idx_labels(labels);
  dataset.num_classes = num_classes;
  dataset.name = name;
  dataset.provenance.files.push_back({images.string(), sha256_file(images)});
  dataset.provenance.files.push_back({labels.string(), sha256_file(labels)});
  if (dataset.features.dim(0) != dataset.labels.size()) {
    throw FormatError("IDX pair mismatch: " + std::to_string(dataset.features.dim(0)) +
                      " images vs " + std::to_string(dataset.labels.size()) + " labels");
  }
  dataset.validate();
  return dataset;
}

LabeledDataset synth_blobs(int num_classes, int per_class, int dim, double spread,
                           std::uint64_t seed) {
  if (num_classes < 2) throw ConfigError("synth_blobs: need at least 2 classes");
  if (per_class < 1) throw ConfigError("synth_blobs: per_class must be >= 1");
  if (dim < 1) throw ConfigError("synth_blobs: dim must be >= 1");
  if (!(spread > 0.0)) throw ConfigError("synth_blobs: spread must be > 0");

  const std::size_t n = static_cast<std::size_t>(num_classes) * per_class;
  LabeledDataset dataset;
  dataset.features = Tensor({n, static_cast<std::size_t>(dim)});
  dataset.labels.resize(n);
  dataset.num_classes = num_classes;

  Rng rng(seed);
  std::size_t row = 0;
  for (int k = 0; k < num_classes; ++k) {
    for (int i = 0; i < per_class; ++i, ++row) {
      dataset.labels[row] = k;
      for (int j = 0; j < dim; ++j) {
        const double mean = j == 0 ? static_cast<double>(k) : 0.0;
        dataset.features.at(row, static_cast<std::size_t>(j)) = mean + spread * rng.normal();
      }
    }
  }

  std::ostringstream spec;
  spec << "blobs(classes=" << num_classes << ", per_class=" << per_class << ", dim=" << dim
       << ", spread=" << spread << ")";
  dataset.name = "synth-blobs";
  dataset.provenance.generator = spec.str();
  dataset.provenance.seed = seed;
  return dataset;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("split: train_fraction must lie in (0, 1], got " +
                      std::to_string(train_fraction));
  }
  if (val_fraction < 0.0 || train_fraction + val_fraction > 1.0 + 1e-12) {
    throw ConfigError("split: fractions must be nonnegative and sum to <= 1");
  }
}

LabeledDataset gather(const LabeledDataset& dataset, const std::vector<std::size_t>& indices) {
  LabeledDataset out;
  out.features = gather_rows(dataset.features, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(dataset.labels[i]);
  out.num_classes = dataset.num_classes;
  out.name = dataset.name;
  out.provenance = dataset.provenance;
  return out;
}

Tensor gather_rows(const Tensor& features, const std::vector<std::size_t>& indices) {
  const std::size_t width = features.cols();
  std::vector<std::size_t> shape = features.shape;
  shape[0] = indices.size();
  Tensor out(shape);
  for (std::size_t row = 0; row < indices.size(); ++row) {
    const double* src = features.data.data() + indices[row] * width;
    std::copy(src, src + width, out.data.data() + row * width);
  }
  return out;
}

Folds split(const LabeledDataset& dataset, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = dataset.size();
  Rng rng(spec.seed);
  const std::vector<std::size_t> order = rng.permutation(n);

  std::size_t n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(spec.val_fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);

  const std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  const std::vector<std::size_t> val_idx(order.begin() + n_train,
                                         order.begin() + n_train + n_val);
  const std::vector<std::size_t> test_idx(order.begin() + n_train + n_val, order.end());

  Folds folds;
  folds.train = gather(dataset, train_idx);
  folds.val = gather(dataset, val_idx);
  folds.test = gather(dataset, test_idx);
  return folds;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t shuffle_seed) {
  if (batch_size < 1) throw ConfigError("make_batches: batch_size must be >= 1");
  Rng rng(shuffle_seed);
  const std::vector<std::size_t> order = rng.permutation(n);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

Standardizer Standardizer::fit(const Tensor& features) {
  // Per channel for images, one global statistic per column block for flat data.
  const std::size_t groups = features.rank() == 4 ? features.dim(1) : 1;
  const std::size_t group_size = features.size() / features.dim(0) / groups;
  const std::size_t n = features.dim(0);

  Standardizer s;
  s.mean.assign(groups, 0.0);
  s.stddev.assign(groups, 0.0);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t g = 0; g < groups; ++g) {
      const double* base = features.data.data() + (row * groups + g) * group_size;
      for (std::size_t i = 0; i < group_size; ++i) s.mean[g] += base[i];
    }
  }
  const double count = static_cast<double>(n * group_size);
  for (std::size_t g = 0; g < groups; ++g) s.mean[g] /= count;
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t g = 0; g < groups; ++g) {
      const double* base = features.data.data() + (row * groups + g) * group_size;
      for (std::size_t i = 0; i < group_size; ++i) {
        const double d = base[i] - s.mean[g];
        s.stddev[g] += d * d;
      }
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    s.stddev[g] = std::sqrt(s.stddev[g] / count);
    if (s.stddev[g] < 1e-12) s.stddev[g] = 1.0;  // constant channel
  }
  return s;
}

void Standardizer::apply(Tensor& features) const {
  const std::size_t groups = features.rank() == 4 ? features.dim(1) : 1;
  if (groups != mean.size()) {
    throw ShapeError("standardizer fitted on " + std::to_string(mean.size()) +
                     " channels, applied to " + std::to_string(groups));
  }
  const std::size_t group_size = features.size() / features.dim(0) / groups;
  for (std::size_t row = 0; row < features.dim(0); ++row) {
    for (std::size_t g = 0; g < groups; ++g) {
      double* base = features.data.data() + (row * groups + g) * group_size;
      for (std::size_t i = 0; i < group_size; ++i) base[i] = (base[i] - mean[g]) / stddev[g];
    }
  }
}

Tensor shift_augment(const Tensor& images, int max_shift, Rng& rng) {
  if (max_shift == 0) return images;
  if (images.rank() != 4) {
    throw ShapeError("shift_augment: expected [N x C x H x W] images, got " +
                     images.shape_string());
  }
  const std::size_t n = images.dim(0), c = images.dim(1), h = images.dim(2), w = images.dim(3);
  Tensor out(images.shape);
  const std::uint64_t span = 2 * static_cast<std::uint64_t>(max_shift) + 1;
  for (std::size_t ni = 0; ni < n; ++ni) {
    const int dy = static_cast<int>(rng.below(span)) - max_shift;
    const int dx = static_cast<int>(rng.below(span)) - max_shift;
    for (std::size_t ci = 0; ci < c; ++ci) {
      for (std::size_t y = 0; y < h; ++y) {
        const int sy = static_cast<int>(y) - dy;
        if (sy < 0 || sy >= static_cast<int>(h)) continue;
        for (std::size_t x = 0; x < w; ++x) {
          const int sx = static_cast<int>(x) - dx;
          if (sx < 0 || sx >= static_cast<int>(w)) continue;
          out.data[((ni * c + ci) * h + y) * w + x] =
              images.data[((ni * c + ci) * h + sy) * w + sx];
        }
      }
    }
  }
  return out;
}

}  // namespace confbench
