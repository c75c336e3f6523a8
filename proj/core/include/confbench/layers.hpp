#ifndef CONFBENCH_LAYERS_HPP
#define CONFBENCH_LAYERS_HPP

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "confbench/rng.hpp"
#include "confbench/tensor.hpp"

namespace confbench {

/// Execution mode for forward passes.
///  - kTrain: caches activations for backward; dropout samples masks.
///  - kInference: pure function of the input, no state mutation.
///  - kMcSample: like inference but dropout keeps sampling (MC dropout).
enum class Mode { kTrain, kInference, kMcSample };

/// y = x . W + b with x [batch x in], W [in x out], b [out].
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

/// Row-wise softmax, stabilized by max-subtraction. Throws NumericError on
/// non-finite logits; rows must have at least two classes.
Tensor softmax(const Tensor& logits);

class Layer {
 public:
  virtual ~Layer() = default;

  /// In kTrain mode the layer caches what backward() needs; the other modes
  /// leave the layer untouched (except dropout in kMcSample, which draws
  /// fresh masks).
  virtual Tensor forward(const Tensor& input, Mode mode) = 0;

  /// Propagates gradients; accumulates into parameter grads. Only valid
  /// after a kTrain forward.
  virtual Tensor backward(const Tensor& grad_output) = 0;

  virtual std::vector<Tensor*> parameters() { return {}; }
  virtual void init_params(Rng&) {}
  virtual std::string_view kind() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Dense final : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Tensor*> parameters() override { return {&weights, &bias}; }
  void init_params(Rng& rng) override;
  std::string_view kind() const override { return "dense"; }
  std::unique_ptr<Layer> clone() const override;

  std::size_t in_features() const { return weights.dim(0); }
  std::size_t out_features() const { return weights.dim(1); }

  Tensor weights;  // [in x out]
  Tensor bias;     // [out]

 private:
  Tensor cached_input_;
  bool has_cache_ = false;
};

class Relu final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::string_view kind() const override { return "relu"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor cached_input_;
  bool has_cache_ = false;
};

class Sigmoid final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::string_view kind() const override { return "sigmoid"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor cached_output_;
  bool has_cache_ = false;
};

class SoftmaxLayer final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::string_view kind() const override { return "softmax"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor cached_output_;
  bool has_cache_ = false;
};

/// Inverted dropout: during kTrain and kMcSample each unit is zeroed with
/// probability `rate` and survivors are scaled by 1/(1-rate), so the
/// expected activation is unchanged. kInference is the identity. When
/// `bypass` is set the layer is the identity in every mode (used while
/// fine-tuning the confidence encoder, where dropout must stay off but
/// gradients still flow).
class Dropout final : public Layer {
 public:
  Dropout(double rate, std::uint64_t seed);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::string_view kind() const override { return "dropout"; }
  std::unique_ptr<Layer> clone() const override;

  void reseed(std::uint64_t seed);
  void set_bypass(bool bypass) { bypass_ = bypass; }
  double rate() const { return rate_; }

 private:
  double rate_;
  Rng rng_;
  bool bypass_ = false;
  std::vector<double> cached_scale_;  // per-unit 0 or 1/(1-rate)
  bool has_cache_ = false;
};

/// Valid-padding 2-D convolution over [N x C x H x W] input.
class Conv2d final : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
         std::size_t stride = 1);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Tensor*> parameters() override { return {&weights, &bias}; }
  void init_params(Rng& rng) override;
  std::string_view kind() const override { return "conv2d"; }
  std::unique_ptr<Layer> clone() const override;

  Tensor weights;  // [out_c x in_c x k x k]
  Tensor bias;     // [out_c]

 private:
  std::size_t kernel_;
  std::size_t stride_;
  Tensor cached_input_;
  bool has_cache_ = false;
};

/// Non-overlapping max pooling with window == stride over [N x C x H x W].
class MaxPool2d final : public Layer {
 public:
  explicit MaxPool2d(std::size_t window = 2);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::string_view kind() const override { return "maxpool2d"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  std::size_t window_;
  std::vector<std::size_t> cached_argmax_;
  std::vector<std::size_t> cached_input_shape_;
  bool has_cache_ = false;
};

/// [N x ...] -> [N x prod(...)].
class Flatten final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_output) override;
  std::string_view kind() const override { return "flatten"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  std::vector<std::size_t> cached_input_shape_;
  bool has_cache_ = false;
};

/// Ordered stack of layers.
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  Tensor forward(const Tensor& input, Mode mode) const;
  Tensor backward(const Tensor& grad_output);

  std::vector<Tensor*> parameters() const;
  void init_params(Rng& rng);

  Sequential clone() const;

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  bool has_dropout() const;
  /// Reseeds every dropout layer with a per-layer seed derived from `base`.
  void reseed_dropout(std::uint64_t base);
  void set_dropout_bypass(bool bypass);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Copy of current parameter values, restorable later (early stopping).
std::vector<std::vector<double>> snapshot_parameters(const std::vector<Tensor*>& params);
void restore_parameters(const std::vector<Tensor*>& params,
                        const std::vector<std::vector<double>>& snapshot);

}  // namespace confbench

#endif  // CONFBENCH_LAYERS_HPP
