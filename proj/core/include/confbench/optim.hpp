#ifndef CONFBENCH_OPTIM_HPP
#define CONFBENCH_OPTIM_HPP

#include <memory>
#include <string>
#include <vector>

#include "confbench/tensor.hpp"

namespace confbench {

/// Applies one update from the accumulated gradients and clears them.
/// State buffers are keyed by position, so every step() must receive the
/// same parameter list in the same order.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual void step(const std::vector<Tensor*>& params) = 0;
  virtual std::string_view kind() const = 0;

  void set_learning_rate(double lr) { learning_rate_ = lr; }
  double learning_rate() const { return learning_rate_; }

 protected:
  explicit Optimizer(double learning_rate);
  double learning_rate_;
};

/// v <- momentum * v + g;  p <- p - lr * v
class SgdMomentum final : public Optimizer {
 public:
  explicit SgdMomentum(double learning_rate, double momentum = 0.9);

  void step(const std::vector<Tensor*>& params) override;
  std::string_view kind() const override { return "sgd-momentum"; }

 private:
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

/// Adaptive-moment estimation with bias correction.
class Adam final : public Optimizer {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void step(const std::vector<Tensor*>& params) override;
  std::string_view kind() const override { return "adam"; }

 private:
  double beta1_, beta2_, epsilon_;
  long step_count_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

struct OptimizerSettings {
  std::string kind = "sgd-momentum";
  double learning_rate = 0.05;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSettings& settings);

}  // namespace confbench

#endif  // CONFBENCH_OPTIM_HPP
