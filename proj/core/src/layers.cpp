#include "confbench/layers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "confbench/errors.hpp"

namespace confbench {

namespace {

using MatrixMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatrixMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

ConstMatrixMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatrixMap(t.data.data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

void require_cache(bool has_cache, const char* layer) {
  if (!has_cache) {
    throw std::logic_error(std::string(layer) + ": backward without a train-mode forward");
  }
}

}  // namespace

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2) {
    throw ShapeError("dense: weights must be rank 2, got " + weights.shape_string());
  }
  const std::size_t in = weights.dim(0);
  const std::size_t out = weights.dim(1);
  if (input.rank() < 2 || input.cols() != in) {
    throw ShapeError("dense: input " + input.shape_string() + " does not match weights " +
                     weights.shape_string());
  }
  if (bias.size() != out) {
    throw ShapeError("dense: bias " + bias.shape_string() + " does not match weights " +
                     weights.shape_string());
  }
  const std::size_t batch = input.rows();
  Tensor output({batch, out});
  MatrixMap y(output.data.data(), batch, out);
  y.noalias() = as_matrix(input, batch, in) * as_matrix(weights, in, out);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < out; ++j) output.at(i, j) += bias.at(j);
  }
  return output;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() < 2 || logits.cols() < 2) {
    throw ShapeError("softmax: need [batch x K] logits with K >= 2, got " +
                     logits.shape_string());
  }
  if (!logits.all_finite()) {
    throw NumericError("softmax: non-finite logits");
  }
  const std::size_t batch = logits.rows();
  const std::size_t k = logits.cols();
  Tensor probs({batch, k});
  for (std::size_t i = 0; i < batch; ++i) {
    double max_logit = logits.at(i, 0);
    for (std::size_t j = 1; j < k; ++j) max_logit = std::max(max_logit, logits.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double e = std::exp(logits.at(i, j) - max_logit);
      probs.at(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < k; ++j) probs.at(i, j) /= sum;
  }
  return probs;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features)
    : weights({in_features, out_features}), bias({out_features}) {}

void Dense::init_params(Rng& rng) {
  // He initialization: N(0, 2 / fan_in).
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_features()));
  for (double& w : weights.data) w = stddev * rng.normal();
  for (double& b : bias.data) b = 0.0;
}

Tensor Dense::forward(const Tensor& input, Mode mode) {
  Tensor output = dense_forward(input, weights, bias);
  if (mode == Mode::kTrain) {
    cached_input_ = input;
    has_cache_ = true;
  }
  return output;
}

Tensor Dense::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "dense");
  const std::size_t batch = cached_input_.rows();
  const std::size_t in = in_features();
  const std::size_t out = out_features();
  if (grad_output.rows() != batch || grad_output.cols() != out) {
    throw ShapeError("dense backward: gradient " + grad_output.shape_string() +
                     " does not match output [" + std::to_string(batch) + " x " +
                     std::to_string(out) + "]");
  }

  weights.ensure_grad();
  bias.ensure_grad();

  auto x = as_matrix(cached_input_, batch, in);
  auto dy = as_matrix(grad_output, batch, out);

  MatrixMap dw(weights.grad.data(), in, out);
  dw.noalias() += x.transpose() * dy;
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < out; ++j) bias.grad[j] += grad_output.at(i, j);
  }

  Tensor grad_input({batch, in});
  MatrixMap dx(grad_input.data.data(), batch, in);
  dx.noalias() = dy * as_matrix(weights, in, out).transpose();
  return grad_input;
}

std::unique_ptr<Layer> Dense::clone() const {
  auto copy = std::make_unique<Dense>(in_features(), out_features());
  copy->weights = weights;
  copy->bias = bias;
  return copy;
}

// ---------------------------------------------------------------- Relu

Tensor Relu::forward(const Tensor& input, Mode mode) {
  Tensor output = input;
  for (double& v : output.data) v = v > 0.0 ? v : 0.0;
  output.grad.clear();
  if (mode == Mode::kTrain) {
    cached_input_ = input;
    has_cache_ = true;
  }
  return output;
}

Tensor Relu::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "relu");
  require_same_shape(grad_output, cached_input_, "relu backward");
  Tensor grad_input = grad_output;
  for (std::size_t i = 0; i < grad_input.size(); ++i) {
    if (cached_input_.data[i] <= 0.0) grad_input.data[i] = 0.0;
  }
  return grad_input;
}

std::unique_ptr<Layer> Relu::clone() const { return std::make_unique<Relu>(); }

// ---------------------------------------------------------------- Sigmoid

Tensor Sigmoid::forward(const Tensor& input, Mode mode) {
  Tensor output = input;
  for (double& v : output.data) v = 1.0 / (1.0 + std::exp(-v));
  output.grad.clear();
  if (mode == Mode::kTrain) {
    cached_output_ = output;
    has_cache_ = true;
  }
  return output;
}

Tensor Sigmoid::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "sigmoid");
  require_same_shape(grad_output, cached_output_, "sigmoid backward");
  Tensor grad_input = grad_output;
  for (std::size_t i = 0; i < grad_input.size(); ++i) {
    const double y = cached_output_.data[i];
    grad_input.data[i] *= y * (1.0 - y);
  }
  return grad_input;
}

std::unique_ptr<Layer> Sigmoid::clone() const { return std::make_unique<Sigmoid>(); }

// ---------------------------------------------------------------- Softmax

Tensor SoftmaxLayer::forward(const Tensor& input, Mode mode) {
  Tensor output = softmax(input);
  if (mode == Mode::kTrain) {
    cached_output_ = output;
    has_cache_ = true;
  }
  return output;
}

Tensor SoftmaxLayer::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "softmax");
  require_same_shape(grad_output, cached_output_, "softmax backward");
  const std::size_t batch = cached_output_.rows();
  const std::size_t k = cached_output_.cols();
  Tensor grad_input({batch, k});
  for (std::size_t i = 0; i < batch; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) dot += grad_output.at(i, j) * cached_output_.at(i, j);
    for (std::size_t j = 0; j < k; ++j) {
      grad_input.at(i, j) = cached_output_.at(i, j) * (grad_output.at(i, j) - dot);
    }
  }
  return grad_input;
}

std::unique_ptr<Layer> SoftmaxLayer::clone() const { return std::make_unique<SoftmaxLayer>(); }

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

Tensor Dropout::forward(const Tensor& input, Mode mode) {
  const bool sampling = !bypass_ && rate_ > 0.0 &&
                        (mode == Mode::kTrain || mode == Mode::kMcSample);
  if (!sampling) {
    if (mode == Mode::kTrain) {
      cached_scale_.assign(input.size(), 1.0);
      has_cache_ = true;
    }
    return input;
  }
  const double keep_scale = 1.0 / (1.0 - rate_);
  Tensor output = input;
  std::vector<double> scale(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    scale[i] = rng_.uniform() < rate_ ? 0.0 : keep_scale;
    output.data[i] *= scale[i];
  }
  output.grad.clear();
  if (mode == Mode::kTrain) {
    cached_scale_ = std::move(scale);
    has_cache_ = true;
  }
  return output;
}

Tensor Dropout::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "dropout");
  if (grad_output.size() != cached_scale_.size()) {
    throw ShapeError("dropout backward: gradient " + grad_output.shape_string() +
                     " does not match cached mask of " +
                     std::to_string(cached_scale_.size()) + " units");
  }
  Tensor grad_input = grad_output;
  for (std::size_t i = 0; i < grad_input.size(); ++i) grad_input.data[i] *= cached_scale_[i];
  return grad_input;
}

std::unique_ptr<Layer> Dropout::clone() const {
  auto copy = std::make_unique<Dropout>(*this);
  copy->cached_scale_.clear();
  copy->has_cache_ = false;
  return copy;
}

void Dropout::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
               std::size_t stride)
    : weights({out_channels, in_channels, kernel, kernel}),
      bias({out_channels}),
      kernel_(kernel),
      stride_(stride) {
  if (kernel == 0 || stride == 0) {
    throw ConfigError("conv2d: kernel and stride must be positive");
  }
}

void Conv2d::init_params(Rng& rng) {
  const double fan_in = static_cast<double>(weights.dim(1) * kernel_ * kernel_);
  const double stddev = std::sqrt(2.0 / fan_in);
  for (double& w : weights.data) w = stddev * rng.normal();
  for (double& b : bias.data) b = 0.0;
}

Tensor Conv2d::forward(const Tensor& input, Mode mode) {
  if (input.rank() != 4 || input.dim(1) != weights.dim(1)) {
    throw ShapeError("conv2d: input " + input.shape_string() + " does not match kernel " +
                     weights.shape_string());
  }
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (h < kernel_ || w < kernel_) {
    throw ShapeError("conv2d: input " + input.shape_string() + " smaller than kernel " +
                     weights.shape_string());
  }
  const std::size_t f = weights.dim(0);
  const std::size_t oh = (h - kernel_) / stride_ + 1;
  const std::size_t ow = (w - kernel_) / stride_ + 1;

  Tensor output({n, f, oh, ow});
  const auto in_at = [&](std::size_t ni, std::size_t ci, std::size_t y, std::size_t x) {
    return input.data[((ni * c + ci) * h + y) * w + x];
  };
  const auto w_at = [&](std::size_t fi, std::size_t ci, std::size_t u, std::size_t v) {
    return weights.data[((fi * c + ci) * kernel_ + u) * kernel_ + v];
  };
  for (std::size_t ni = 0; ni < n; ++ni) {
    for (std::size_t fi = 0; fi < f; ++fi) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double sum = bias.at(fi);
          for (std::size_t ci = 0; ci < c; ++ci) {
            for (std::size_t u = 0; u < kernel_; ++u) {
              for (std::size_t v = 0; v < kernel_; ++v) {
                sum += w_at(fi, ci, u, v) * in_at(ni, ci, oy * stride_ + u, ox * stride_ + v);
              }
            }
          }
          output.data[((ni * f + fi) * oh + oy) * ow + ox] = sum;
        }
      }
    }
  }
  if (mode == Mode::kTrain) {
    cached_input_ = input;
    has_cache_ = true;
  }
  return output;
}

Tensor Conv2d::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "conv2d");
  const Tensor& input = cached_input_;
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t f = weights.dim(0);
  const std::size_t oh = (h - kernel_) / stride_ + 1;
  const std::size_t ow = (w - kernel_) / stride_ + 1;
  if (grad_output.shape != std::vector<std::size_t>{n, f, oh, ow}) {
    throw ShapeError("conv2d backward: gradient " + grad_output.shape_string() +
                     " does not match output " +
                     shape_string({n, f, oh, ow}));
  }

  weights.ensure_grad();
  bias.ensure_grad();
  Tensor grad_input(input.shape);

  const auto in_idx = [&](std::size_t ni, std::size_t ci, std::size_t y, std::size_t x) {
    return ((ni * c + ci) * h + y) * w + x;
  };
  const auto w_idx = [&](std::size_t fi, std::size_t ci, std::size_t u, std::size_t v) {
    return ((fi * c + ci) * kernel_ + u) * kernel_ + v;
  };
  for (std::size_t ni = 0; ni < n; ++ni) {
    for (std::size_t fi = 0; fi < f; ++fi) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const double dy = grad_output.data[((ni * f + fi) * oh + oy) * ow + ox];
          bias.grad[fi] += dy;
          for (std::size_t ci = 0; ci < c; ++ci) {
            for (std::size_t u = 0; u < kernel_; ++u) {
              for (std::size_t v = 0; v < kernel_; ++v) {
                const std::size_t yy = oy * stride_ + u;
                const std::size_t xx = ox * stride_ + v;
                weights.grad[w_idx(fi, ci, u, v)] += dy * input.data[in_idx(ni, ci, yy, xx)];
                grad_input.data[in_idx(ni, ci, yy, xx)] +=
                    dy * weights.data[w_idx(fi, ci, u, v)];
              }
            }
          }
        }
      }
    }
  }
  return grad_input;
}

std::unique_ptr<Layer> Conv2d::clone() const {
  auto copy = std::make_unique<Conv2d>(weights.dim(1), weights.dim(0), kernel_, stride_);
  copy->weights = weights;
  copy->bias = bias;
  return copy;
}

// ---------------------------------------------------------------- MaxPool2d

MaxPool2d::MaxPool2d(std::size_t window) : window_(window) {
  if (window == 0) throw ConfigError("maxpool2d: window must be positive");
}

Tensor MaxPool2d::forward(const Tensor& input, Mode mode) {
  if (input.rank() != 4) {
    throw ShapeError("maxpool2d: expected [N x C x H x W] input, got " + input.shape_string());
  }
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t oh = h / window_;
  const std::size_t ow = w / window_;
  if (oh == 0 || ow == 0) {
    throw ShapeError("maxpool2d: input " + input.shape_string() + " smaller than window " +
                     std::to_string(window_));
  }

  Tensor output({n, c, oh, ow});
  std::vector<std::size_t> argmax(output.size());
  for (std::size_t ni = 0; ni < n; ++ni) {
    for (std::size_t ci = 0; ci < c; ++ci) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          std::size_t best = ((ni * c + ci) * h + oy * window_) * w + ox * window_;
          double best_value = input.data[best];
          for (std::size_t u = 0; u < window_; ++u) {
            for (std::size_t v = 0; v < window_; ++v) {
              const std::size_t idx =
                  ((ni * c + ci) * h + oy * window_ + u) * w + ox * window_ + v;
              if (input.data[idx] > best_value) {
                best_value = input.data[idx];
                best = idx;
              }
            }
          }
          const std::size_t out_idx = ((ni * c + ci) * oh + oy) * ow + ox;
          output.data[out_idx] = best_value;
          argmax[out_idx] = best;
        }
      }
    }
  }
  if (mode == Mode::kTrain) {
    cached_argmax_ = std::move(argmax);
    cached_input_shape_ = input.shape;
    has_cache_ = true;
  }
  return output;
}

Tensor MaxPool2d::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "maxpool2d");
  if (grad_output.size() != cached_argmax_.size()) {
    throw ShapeError("maxpool2d backward: gradient " + grad_output.shape_string() +
                     " does not match pooled output of " +
                     std::to_string(cached_argmax_.size()) + " units");
  }
  Tensor grad_input(cached_input_shape_);
  for (std::size_t i = 0; i < grad_output.size(); ++i) {
    grad_input.data[cached_argmax_[i]] += grad_output.data[i];
  }
  return grad_input;
}

std::unique_ptr<Layer> MaxPool2d::clone() const { return std::make_unique<MaxPool2d>(window_); }

// ---------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& input, Mode mode) {
  if (input.rank() < 2) {
    throw ShapeError("flatten: expected rank >= 2 input, got " + input.shape_string());
  }
  Tensor output({input.rows(), input.cols()}, input.data);
  if (mode == Mode::kTrain) {
    cached_input_shape_ = input.shape;
    has_cache_ = true;
  }
  return output;
}

Tensor Flatten::backward(const Tensor& grad_output) {
  require_cache(has_cache_, "flatten");
  if (grad_output.size() != shape_size(cached_input_shape_)) {
    throw ShapeError("flatten backward: gradient " + grad_output.shape_string() +
                     " does not match input " + shape_string(cached_input_shape_));
  }
  return Tensor(cached_input_shape_, grad_output.data);
}

std::unique_ptr<Layer> Flatten::clone() const { return std::make_unique<Flatten>(); }

// ---------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& input, Mode mode) const {
  Tensor activation = input;
  for (const auto& layer : layers_) {
    activation = layer->forward(activation, mode);
  }
  return activation;
}

Tensor Sequential::backward(const Tensor& grad_output) {
  Tensor grad = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    grad = (*it)->backward(grad);
  }
  return grad;
}

std::vector<Tensor*> Sequential::parameters() const {
  std::vector<Tensor*> params;
  for (const auto& layer : layers_) {
    for (Tensor* p : layer->parameters()) params.push_back(p);
  }
  return params;
}

void Sequential::init_params(Rng& rng) {
  for (const auto& layer : layers_) layer->init_params(rng);
}

Sequential Sequential::clone() const {
  Sequential copy;
  for (const auto& layer : layers_) copy.add(layer->clone());
  return copy;
}

bool Sequential::has_dropout() const {
  for (const auto& layer : layers_) {
    if (layer->kind() == "dropout") return true;
  }
  return false;
}

void Sequential::reseed_dropout(std::uint64_t base) {
  std::size_t index = 0;
  for (const auto& layer : layers_) {
    if (auto* dropout = dynamic_cast<Dropout*>(layer.get())) {
      dropout->reseed(derive_seed(base, "dropout", index));
    }
    ++index;
  }
}

void Sequential::set_dropout_bypass(bool bypass) {
  for (const auto& layer : layers_) {
    if (auto* dropout = dynamic_cast<Dropout*>(layer.get())) {
      dropout->set_bypass(bypass);
    }
  }
}

std::vector<std::vector<double>> snapshot_parameters(const std::vector<Tensor*>& params) {
  std::vector<std::vector<double>> snapshot;
  snapshot.reserve(params.size());
  for (const Tensor* p : params) snapshot.push_back(p->data);
  return snapshot;
}

void restore_parameters(const std::vector<Tensor*>& params,
                        const std::vector<std::vector<double>>& snapshot) {
  if (params.size() != snapshot.size()) {
    throw std::logic_error("restore_parameters: snapshot arity mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->data.size() != snapshot[i].size()) {
      throw std::logic_error("restore_parameters: tensor size mismatch");
    }
    params[i]->data = snapshot[i];
  }
}

}  // namespace confbench
