// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ood::math {

enum class OptimizerKind { adam, adadelta, rmsprop };

OptimizerKind parse_optimizer(std::string_view name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;    // adam
  double beta2 = 0.999;  // adam
  double rho = 0.9;      // rmsprop / adadelta decay
  double epsilon = 1e-8;

  /// adam (1e-3, 0.9, 0.999, 1e-8); rmsprop (1e-3, rho 0.9, 1e-8);
  /// adadelta (lr 1.0, rho 0.95, 1e-6).
  static OptimizerConfig defaults(OptimizerKind kind);
};

/// Accumulators for one parameter tensor.
class OptimizerState {
 public:
  OptimizerState(const OptimizerConfig& config, std::size_t size);

  const OptimizerConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return first_.size(); }
  std::uint64_t step_count() const noexcept { return steps_; }

  /// Applies one update in place. Throws std::invalid_argument on a shape
  /// mismatch between state, parameters and gradients.
  void step(std::span<float> params, std::span<const double> grads);
  void step(std::span<double> params, std::span<const double> grads);

 private:
  template <typename T>
  void step_impl(std::span<T> params, std::span<const double> grads);

  OptimizerConfig config_;
  std::vector<double> first_;   // adam m / rmsprop cache / adadelta E[g^2]
  std::vector<double> second_;  // adam v / adadelta E[dx^2]
  std::uint64_t steps_ = 0;
};

inline void optimizer_step(OptimizerState& state, std::span<float> params,
                           std::span<const double> grads) {
  state.step(params, grads);
}

}  // namespace ood::math
