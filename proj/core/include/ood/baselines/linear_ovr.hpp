// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ood/baselines/features.hpp"
#include "ood/math/matrix.hpp"

namespace ood::baselines {

struct OvrConfig {
  std::size_t epochs = 20;
  double lambda = 1e-4;  // L2 regularisation strength
  double eta0 = 0.1;     // step size eta_t = eta0 / (1 + eta0 * lambda * t)
  std::uint64_t seed = 42;
};

/// One linear hinge-loss classifier per domain, trained one-vs-rest by
/// stochastic subgradient descent. Inputs are scaled to unit L2 norm before
/// scoring, both in training and at prediction time.
class LinearOvrClassifier {
 public:
  LinearOvrClassifier(std::vector<std::string> labels, math::MatrixD weights,
                      math::VectorD bias);

  std::size_t num_domains() const noexcept { return labels_.size(); }
  std::size_t dimension() const noexcept { return weights_.cols(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const math::MatrixD& weights() const noexcept { return weights_; }
  const math::VectorD& bias() const noexcept { return bias_; }

  /// Per-domain margins w_d . x + b_d. Columns >= dimension() are ignored.
  math::VectorD margins(const SparseVector& x) const;
  std::size_t predict(const SparseVector& x) const;

 private:
  std::vector<std::string> labels_;
  math::MatrixD weights_;  // |D| x dimension
  math::VectorD bias_;
};

/// Throws std::invalid_argument with fewer than two distinct labels or when
/// the feature and label lists differ in length.
LinearOvrClassifier train_ovr(std::span<const SparseVector> features,
                              std::span<const std::string> labels, std::size_t dimension,
                              const OvrConfig& config = {});

/// Highest margin over domains; the sentence is rejected by every domain
/// classifier when this falls below the threshold.
double cbc_score(const LinearOvrClassifier& model, const SparseVector& x);

/// Highest sigmoid(margin) confidence, in (0, 1).
double idv_score(const LinearOvrClassifier& model, const SparseVector& x);

}  // namespace ood::baselines
