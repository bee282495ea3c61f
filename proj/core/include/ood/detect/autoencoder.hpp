// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ood/math/matrix.hpp"
#include "ood/math/optimizer.hpp"
#include "ood/math/rng.hpp"

namespace ood::detect {

struct AutoencoderOutput {
  math::VectorD code;            // c = tanh(W_phi r + b_phi), m/2 values
  math::VectorD reconstruction;  // r_hat = tanh(W_psi c + b_psi), m values
  double score = 0.0;            // ||r - r_hat||^2
};

/// Single-bottleneck tanh autoencoder m -> m/2 -> m.
class Autoencoder {
 public:
  struct Gradients {
    math::MatrixD encoder_weights;
    math::VectorD encoder_bias;
    math::MatrixD decoder_weights;
    math::VectorD decoder_bias;

    void zero();
    double squared_norm() const;
  };

  /// Glorot-initialised weights, zero biases. Throws std::invalid_argument
  /// for odd or zero m.
  Autoencoder(std::size_t input_size, math::Rng& rng);
  Autoencoder(math::Matrix encoder_weights, math::Vector encoder_bias,
              math::Matrix decoder_weights, math::Vector decoder_bias);

  std::size_t input_size() const noexcept { return decoder_bias_.size(); }
  std::size_t code_size() const noexcept { return encoder_bias_.size(); }

  AutoencoderOutput forward(std::span<const double> input) const;
  double score(std::span<const double> input) const { return forward(input).score; }

  Gradients make_gradients() const;
  /// Adds `scale` times d||r - r_hat||^2 / d(params) into grads; returns the score.
  double accumulate_gradients(std::span<const double> input, Gradients& grads,
                              double scale = 1.0) const;

  math::Matrix& encoder_weights() noexcept { return encoder_weights_; }
  const math::Matrix& encoder_weights() const noexcept { return encoder_weights_; }
  math::Vector& encoder_bias() noexcept { return encoder_bias_; }
  const math::Vector& encoder_bias() const noexcept { return encoder_bias_; }
  math::Matrix& decoder_weights() noexcept { return decoder_weights_; }
  const math::Matrix& decoder_weights() const noexcept { return decoder_weights_; }
  math::Vector& decoder_bias() noexcept { return decoder_bias_; }
  const math::Vector& decoder_bias() const noexcept { return decoder_bias_; }

 private:
  math::Matrix encoder_weights_;  // (m/2) x m
  math::Vector encoder_bias_;
  math::Matrix decoder_weights_;  // m x (m/2)
  math::Vector decoder_bias_;
};

struct AutoencoderConfig {
  math::OptimizerConfig optimizer = math::OptimizerConfig::defaults(math::OptimizerKind::adam);
  std::size_t max_epochs = 100;
  std::size_t patience = 10;  // epochs without a lower mean training score
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;
};

struct AutoencoderReport {
  std::vector<double> mean_scores;  // mean training score after each epoch
};

/// Minimises the mean squared reconstruction error over `inputs`.
/// Throws std::invalid_argument for empty input or inconsistent widths.
Autoencoder train_autoencoder(std::span<const math::VectorD> inputs,
                              const AutoencoderConfig& config,
                              AutoencoderReport* report = nullptr);

}  // namespace ood::detect
