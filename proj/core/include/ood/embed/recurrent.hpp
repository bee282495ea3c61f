// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ood/math/matrix.hpp"
#include "ood/math/rng.hpp"

namespace ood::embed {

enum class CellKind { lstm, rnn };

CellKind parse_cell_kind(std::string_view name);
std::string to_string(CellKind kind);

struct CellGradients {
  math::MatrixD weights;
  math::VectorD bias;

  void zero();
};

/// Parameters of one recurrent direction.
///
/// LSTM: `weights` stacks W_i, W_f, W_C, W_o (each h x (h+e)) into a
/// 4h x (h+e) matrix, `bias` stacks b_i, b_f, b_C, b_o. Every gate reads the
/// concatenation [h(t-1), v(t)].
/// RNN (Elman): h x (h+e) weights, h_t = tanh(W [h(t-1), v(t)] + b).
class RecurrentCell {
 public:
  RecurrentCell() = default;
  RecurrentCell(CellKind kind, std::size_t hidden, std::size_t input);

  CellKind kind() const noexcept { return kind_; }
  std::size_t hidden_size() const noexcept { return hidden_; }
  std::size_t input_size() const noexcept { return input_; }
  std::size_t gate_count() const noexcept { return kind_ == CellKind::lstm ? 4 : 1; }

  math::Matrix& weights() noexcept { return weights_; }
  const math::Matrix& weights() const noexcept { return weights_; }
  math::Vector& bias() noexcept { return bias_; }
  const math::Vector& bias() const noexcept { return bias_; }

  /// Glorot-uniform per gate block (fan_in h+e, fan_out h); forget-gate
  /// bias 1, all other biases 0.
  void initialize(math::Rng& rng);

  CellGradients make_gradients() const;

  /// Per-step activations kept for backpropagation through time.
  struct Trace {
    std::vector<math::VectorD> hidden;  // h(1..n)
    std::vector<math::VectorD> cell;    // c(1..n), LSTM only
    std::vector<math::VectorD> gates;   // [i, f, C~, o] post-activation, LSTM only
  };

  /// Runs the recurrence over `inputs` in the given order from zero state.
  Trace run(std::span<const math::VectorD> inputs) const;

  /// BPTT given dL/dh(n) on the final hidden state only. Accumulates parameter
  /// gradients into `grads`; when `input_grads` is non-null it receives
  /// dL/dv(t) for every step (resized as needed).
  void backprop(const Trace& trace, std::span<const math::VectorD> inputs,
                std::span<const double> final_hidden_grad, CellGradients& grads,
                std::vector<math::VectorD>* input_grads) const;

 private:
  CellKind kind_ = CellKind::lstm;
  std::size_t hidden_ = 0;
  std::size_t input_ = 0;
  math::Matrix weights_;
  math::Vector bias_;
};

struct LstmState {
  math::VectorD hidden;
  math::VectorD cell;
};

/// One LSTM step. Throws std::invalid_argument on shape mismatch or when
/// `params` is not an LSTM cell.
LstmState lstm_step(std::span<const double> input, std::span<const double> hidden_prev,
                    std::span<const double> cell_prev, const RecurrentCell& params);

/// One Elman step h_t = tanh(W [h_prev, v_t] + b).
math::VectorD rnn_step(std::span<const double> input, std::span<const double> hidden_prev,
                       const RecurrentCell& params);

}  // namespace ood::embed
