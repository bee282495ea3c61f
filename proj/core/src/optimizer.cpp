// SPDX-License-Identifier: Apache-2.0
#include "ood/math/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace ood::math {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "adadelta") return OptimizerKind::adadelta;
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  throw std::invalid_argument("unknown optimizer: " + std::string(name));
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::adadelta: return "adadelta";
    case OptimizerKind::rmsprop: return "rmsprop";
  }
  return "unknown";
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig c;
  c.kind = kind;
  switch (kind) {
    case OptimizerKind::adam:
      c.learning_rate = 1e-3;
      c.beta1 = 0.9;
      c.beta2 = 0.999;
      c.epsilon = 1e-8;
      break;
    case OptimizerKind::rmsprop:
      c.learning_rate = 1e-3;
      c.rho = 0.9;
      c.epsilon = 1e-8;
      break;
    case OptimizerKind::adadelta:
      c.learning_rate = 1.0;
      c.rho = 0.95;
      c.epsilon = 1e-6;
      break;
  }
  return c;
}

OptimizerState::OptimizerState(const OptimizerConfig& config, std::size_t size)
    : config_(config), first_(size, 0.0), second_(size, 0.0) {}

void OptimizerState::step(std::span<float> params, std::span<const double> grads) {
  step_impl(params, grads);
}

void OptimizerState::step(std::span<double> params, std::span<const double> grads) {
  step_impl(params, grads);
}

template <typename T>
void OptimizerState::step_impl(std::span<T> params, std::span<const double> grads) {
  if (params.size() != first_.size() || grads.size() != first_.size())
    throw std::invalid_argument("optimizer_step: shape mismatch");
  ++steps_;
  const std::size_t n = params.size();
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;

  switch (config_.kind) {
    case OptimizerKind::adam: {
      const double b1 = config_.beta1;
      const double b2 = config_.beta2;
      const double t = static_cast<double>(steps_);
      const double correction1 = 1.0 - std::pow(b1, t);
      const double correction2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        first_[i] = b1 * first_[i] + (1.0 - b1) * g;
        second_[i] = b2 * second_[i] + (1.0 - b2) * g * g;
        const double m_hat = first_[i] / correction1;
        const double v_hat = second_[i] / correction2;
        const double delta = lr * m_hat / (std::sqrt(v_hat) + eps);
        if (delta != 0.0) params[i] = static_cast<T>(params[i] - delta);
      }
      break;
    }
    case OptimizerKind::rmsprop: {
      const double rho = config_.rho;
      for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        first_[i] = rho * first_[i] + (1.0 - rho) * g * g;
        const double delta = lr * g / (std::sqrt(first_[i]) + eps);
        if (delta != 0.0) params[i] = static_cast<T>(params[i] - delta);
      }
      break;
    }
    case OptimizerKind::adadelta: {
      const double rho = config_.rho;
      for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        first_[i] = rho * first_[i] + (1.0 - rho) * g * g;
        const double update =
            std::sqrt(second_[i] + eps) / std::sqrt(first_[i] + eps) * g;
        second_[i] = rho * second_[i] + (1.0 - rho) * update * update;
        const double delta = lr * update;
        if (delta != 0.0) params[i] = static_cast<T>(params[i] - delta);
      }
      break;
    }
  }
}

}  // namespace ood::math
