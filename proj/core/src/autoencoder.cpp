// SPDX-License-Identifier: Apache-2.0
#include "ood/detect/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ood/embed/classifier.hpp"
#include "ood/math/activations.hpp"
#include "ood/math/init.hpp"
#include "ood/util/log.hpp"

namespace ood::detect {

void Autoencoder::Gradients::zero() {
  encoder_weights.set_zero();
  std::fill(encoder_bias.begin(), encoder_bias.end(), 0.0);
  decoder_weights.set_zero();
  std::fill(decoder_bias.begin(), decoder_bias.end(), 0.0);
}

double Autoencoder::Gradients::squared_norm() const {
  return math::squared_norm(encoder_weights.values()) + math::squared_norm(encoder_bias) +
         math::squared_norm(decoder_weights.values()) + math::squared_norm(decoder_bias);
}

Autoencoder::Autoencoder(std::size_t input_size, math::Rng& rng)
    : encoder_weights_(input_size / 2, input_size),
      encoder_bias_(input_size / 2, 0.0f),
      decoder_weights_(input_size, input_size / 2),
      decoder_bias_(input_size, 0.0f) {
  if (input_size == 0 || input_size % 2 != 0)
    throw std::invalid_argument("autoencoder: input size must be even and positive");
  math::glorot_uniform(encoder_weights_, rng);
  math::glorot_uniform(decoder_weights_, rng);
}

Autoencoder::Autoencoder(math::Matrix encoder_weights, math::Vector encoder_bias,
                         math::Matrix decoder_weights, math::Vector decoder_bias)
    : encoder_weights_(std::move(encoder_weights)),
      encoder_bias_(std::move(encoder_bias)),
      decoder_weights_(std::move(decoder_weights)),
      decoder_bias_(std::move(decoder_bias)) {
  const std::size_t m = decoder_bias_.size();
  if (m == 0 || m % 2 != 0 || !encoder_weights_.same_shape(m / 2, m) ||
      encoder_bias_.size() != m / 2 || !decoder_weights_.same_shape(m, m / 2))
    throw std::invalid_argument("autoencoder: inconsistent parameter shapes");
}

AutoencoderOutput Autoencoder::forward(std::span<const double> input) const {
  if (input.size() != input_size())
    throw std::invalid_argument("autoencoder: input width mismatch");
  AutoencoderOutput out;
  out.code.assign(encoder_bias_.begin(), encoder_bias_.end());
  math::gemv_accumulate(encoder_weights_, input, out.code);
  math::tanh_inplace(out.code);
  out.reconstruction.assign(decoder_bias_.begin(), decoder_bias_.end());
  math::gemv_accumulate(decoder_weights_, out.code, out.reconstruction);
  math::tanh_inplace(out.reconstruction);
  double score = 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double d = input[i] - out.reconstruction[i];
    score += d * d;
  }
  out.score = score;
  return out;
}

Autoencoder::Gradients Autoencoder::make_gradients() const {
  return {math::MatrixD(encoder_weights_.rows(), encoder_weights_.cols()),
          math::VectorD(encoder_bias_.size(), 0.0),
          math::MatrixD(decoder_weights_.rows(), decoder_weights_.cols()),
          math::VectorD(decoder_bias_.size(), 0.0)};
}

double Autoencoder::accumulate_gradients(std::span<const double> input, Gradients& grads,
                                         double scale) const {
  const auto out = forward(input);
  const std::size_t m = input_size();
  math::VectorD d_out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r_hat = out.reconstruction[i];
    d_out[i] = scale * 2.0 * (r_hat - input[i]) * (1.0 - r_hat * r_hat);
  }
  math::outer_accumulate(grads.decoder_weights, d_out, out.code);
  for (std::size_t i = 0; i < m; ++i) grads.decoder_bias[i] += d_out[i];

  math::VectorD d_code(code_size(), 0.0);
  math::gemv_transpose_accumulate(decoder_weights_, d_out, d_code);
  for (std::size_t j = 0; j < d_code.size(); ++j)
    d_code[j] *= 1.0 - out.code[j] * out.code[j];
  math::outer_accumulate(grads.encoder_weights, d_code, input);
  for (std::size_t j = 0; j < d_code.size(); ++j) grads.encoder_bias[j] += d_code[j];
  return out.score;
}

Autoencoder train_autoencoder(std::span<const math::VectorD> inputs,
                              const AutoencoderConfig& config, AutoencoderReport* report) {
  if (inputs.empty()) throw std::invalid_argument("train_autoencoder: no training vectors");
  const std::size_t m = inputs.front().size();
  for (const auto& v : inputs)
    if (v.size() != m) throw std::invalid_argument("train_autoencoder: inconsistent widths");
  if (inputs.size() < m / 2)
    util::log_warning("train_autoencoder: fewer training vectors than the bottleneck width");
  if (config.batch_size == 0) throw std::invalid_argument("train_autoencoder: zero batch size");

  const math::Rng root(config.seed);
  math::Rng init_rng = root.fork(11);
  math::Rng shuffle_rng = root.fork(12);

  Autoencoder model(m, init_rng);
  auto grads = model.make_gradients();
  struct Slot {
    std::span<float> values;
    std::span<const double> grads;
    math::OptimizerState state;
  };
  std::vector<Slot> slots;
  auto add = [&](std::span<float> v, std::span<const double> g) {
    slots.push_back({v, g, math::OptimizerState(config.optimizer, v.size())});
  };
  add(model.encoder_weights().values(), grads.encoder_weights.values());
  add(model.encoder_bias(), grads.encoder_bias);
  add(model.decoder_weights().values(), grads.decoder_weights.values());
  add(model.decoder_bias(), grads.decoder_bias);

  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      grads.zero();
      for (std::size_t k = start; k < stop; ++k)
        model.accumulate_gradients(inputs[order[k]], grads, scale);
      if (!std::isfinite(grads.squared_norm()))
        throw embed::NumericError("train_autoencoder: non-finite gradient");
      for (auto& slot : slots) slot.state.step(slot.values, slot.grads);
    }
    double mean = 0.0;
    for (const auto& v : inputs) mean += model.score(v);
    mean /= static_cast<double>(inputs.size());
    if (!std::isfinite(mean)) throw embed::NumericError("train_autoencoder: non-finite score");
    if (report) report->mean_scores.push_back(mean);
    if (mean < best) {
      best = mean;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return model;
}

}  // namespace ood::detect
