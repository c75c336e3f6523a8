#include "confbench/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "confbench/errors.hpp"

namespace confbench {

namespace {

void sync_state(std::vector<std::vector<double>>& state, const std::vector<Tensor*>& params) {
  if (state.empty()) {
    state.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state[i].assign(params[i]->data.size(), 0.0);
    }
    return;
  }
  if (state.size() != params.size()) {
    throw std::logic_error("optimizer: parameter list changed between steps");
  }
}

}  // namespace

Optimizer::Optimizer(double learning_rate) : learning_rate_(learning_rate) {
  if (!(learning_rate >= 0.0)) {
    throw ConfigError("optimizer: learning rate must be >= 0, got " +
                      std::to_string(learning_rate));
  }
}

SgdMomentum::SgdMomentum(double learning_rate, double momentum)
    : Optimizer(learning_rate), momentum_(momentum) {}

void SgdMomentum::step(const std::vector<Tensor*>& params) {
  sync_state(velocity_, params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (!p.has_grad()) continue;
    auto& v = velocity_[i];
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      v[j] = momentum_ * v[j] + p.grad[j];
      p.data[j] -= learning_rate_ * v[j];
    }
    p.clear_grad();
  }
}

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon)
    : Optimizer(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(const std::vector<Tensor*>& params) {
  sync_state(first_moment_, params);
  sync_state(second_moment_, params);
  ++step_count_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (!p.has_grad()) continue;
    auto& m = first_moment_[i];
    auto& v = second_moment_[i];
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      const double g = p.grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p.data[j] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
    p.clear_grad();
  }
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSettings& settings) {
  if (settings.kind == "sgd-momentum") {
    return std::make_unique<SgdMomentum>(settings.learning_rate, settings.momentum);
  }
  if (settings.kind == "adam") {
    return std::make_unique<Adam>(settings.learning_rate, settings.beta1, settings.beta2,
                                  settings.epsilon);
  }
  throw ConfigError("optimizer: unknown kind '" + settings.kind + "'");
}

}  // namespace confbench
