// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "ood/math/rng.hpp"

namespace ood::math {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

/// Central-difference gradient check. `loss` re-evaluates the objective at
/// the current contents of `params`. Up to `samples` coordinates are drawn
/// (all of them when samples >= params.size()). Each coordinate's error is
/// |analytic - numeric| / max(1, |analytic|, |numeric|), evaluated in double.
/// For float parameters the realised step (after rounding) is used as the
/// divisor. Parameters are restored exactly. Throws on a non-finite loss or
/// epsilon outside [1e-6, 1e-3].
GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<float> params,
                           std::span<const double> analytic, double epsilon,
                           std::size_t samples, Rng& rng);
GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<double> params,
                           std::span<const double> analytic, double epsilon,
                           std::size_t samples, Rng& rng);

}  // namespace ood::math
