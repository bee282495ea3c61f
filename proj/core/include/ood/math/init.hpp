// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

#include "ood/math/matrix.hpp"
#include "ood/math/rng.hpp"

namespace ood::math {

void uniform_fill(std::span<float> values, double bound, Rng& rng);

/// Glorot/Xavier uniform: U[-s, s], s = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(std::span<float> values, std::size_t fan_in,
                    std::size_t fan_out, Rng& rng);

inline void glorot_uniform(Matrix& weights, Rng& rng) {
  glorot_uniform(weights.values(), weights.cols(), weights.rows(), rng);
}

}  // namespace ood::math
