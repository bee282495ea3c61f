// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>

#include "ood/math/matrix.hpp"

namespace ood::math {

inline double sigmoid(double x) noexcept {
  // Branching keeps exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void sigmoid_inplace(std::span<double> v) noexcept;
void tanh_inplace(std::span<double> v) noexcept;
VectorD sigmoid(std::span<const double> v);
VectorD tanh(std::span<const double> v);

/// Numerically stable softmax (max subtraction). Throws on non-finite input
/// or an empty vector.
VectorD softmax(std::span<const double> logits);

}  // namespace ood::math
