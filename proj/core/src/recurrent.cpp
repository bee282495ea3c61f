// SPDX-License-Identifier: Apache-2.0
#include "ood/embed/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ood/math/activations.hpp"
#include "ood/math/init.hpp"

namespace ood::embed {

CellKind parse_cell_kind(std::string_view name) {
  if (name == "lstm") return CellKind::lstm;
  if (name == "rnn") return CellKind::rnn;
  throw std::invalid_argument("unknown cell kind: " + std::string(name));
}

std::string to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "rnn"; }

void CellGradients::zero() {
  weights.set_zero();
  std::fill(bias.begin(), bias.end(), 0.0);
}

RecurrentCell::RecurrentCell(CellKind kind, std::size_t hidden, std::size_t input)
    : kind_(kind),
      hidden_(hidden),
      input_(input),
      weights_(gate_count() * hidden, hidden + input),
      bias_(gate_count() * hidden, 0.0f) {
  if (hidden == 0 || input == 0) throw std::invalid_argument("recurrent cell: zero size");
}

void RecurrentCell::initialize(math::Rng& rng) {
  const std::size_t block = hidden_ * (hidden_ + input_);
  for (std::size_t g = 0; g < gate_count(); ++g)
    math::glorot_uniform(weights_.values().subspan(g * block, block), hidden_ + input_,
                         hidden_, rng);
  std::fill(bias_.begin(), bias_.end(), 0.0f);
  if (kind_ == CellKind::lstm)
    std::fill(bias_.begin() + static_cast<std::ptrdiff_t>(hidden_),
              bias_.begin() + static_cast<std::ptrdiff_t>(2 * hidden_), 1.0f);
}

CellGradients RecurrentCell::make_gradients() const {
  return {math::MatrixD(weights_.rows(), weights_.cols()), math::VectorD(bias_.size(), 0.0)};
}

namespace {

void fill_joint(std::span<double> joint, std::span<const double> hidden_prev,
                std::span<const double> input) {
  std::copy(hidden_prev.begin(), hidden_prev.end(), joint.begin());
  std::copy(input.begin(), input.end(), joint.begin() + static_cast<std::ptrdiff_t>(hidden_prev.size()));
}

// Pre-activations W [h_prev, v] + b.
math::VectorD affine(const RecurrentCell& cell, std::span<const double> joint) {
  math::VectorD a(cell.bias().begin(), cell.bias().end());
  math::gemv_accumulate(cell.weights(), joint, a);
  return a;
}

// Gate activations in place over the stacked [i, f, C~, o] pre-activations,
// then the new cell and hidden states.
void lstm_activate(std::size_t h, std::span<double> gates, std::span<const double> cell_prev,
                   std::span<double> cell, std::span<double> hidden) {
  for (std::size_t k = 0; k < h; ++k) {
    const double i = math::sigmoid(gates[k]);
    const double f = math::sigmoid(gates[h + k]);
    const double g = std::tanh(gates[2 * h + k]);
    const double o = math::sigmoid(gates[3 * h + k]);
    gates[k] = i;
    gates[h + k] = f;
    gates[2 * h + k] = g;
    gates[3 * h + k] = o;
    cell[k] = i * g + f * cell_prev[k];
    hidden[k] = o * std::tanh(cell[k]);
  }
}

void check_step_shapes(const RecurrentCell& cell, std::span<const double> input,
                       std::span<const double> hidden_prev) {
  if (input.size() != cell.input_size() || hidden_prev.size() != cell.hidden_size())
    throw std::invalid_argument("recurrent step: shape mismatch");
}

}  // namespace

RecurrentCell::Trace RecurrentCell::run(std::span<const math::VectorD> inputs) const {
  const std::size_t h = hidden_;
  Trace trace;
  trace.hidden.reserve(inputs.size());
  if (kind_ == CellKind::lstm) {
    trace.cell.reserve(inputs.size());
    trace.gates.reserve(inputs.size());
  }
  math::VectorD zeros(h, 0.0);
  math::VectorD joint(h + input_);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (inputs[t].size() != input_) throw std::invalid_argument("recurrent run: input width mismatch");
    const auto& h_prev = t == 0 ? zeros : trace.hidden[t - 1];
    fill_joint(joint, h_prev, inputs[t]);
    math::VectorD a = affine(*this, joint);
    if (kind_ == CellKind::lstm) {
      const auto& c_prev = t == 0 ? zeros : trace.cell[t - 1];
      math::VectorD c(h), hid(h);
      lstm_activate(h, a, c_prev, c, hid);
      trace.gates.push_back(std::move(a));
      trace.cell.push_back(std::move(c));
      trace.hidden.push_back(std::move(hid));
    } else {
      math::tanh_inplace(a);
      trace.hidden.push_back(std::move(a));
    }
  }
  return trace;
}

void RecurrentCell::backprop(const Trace& trace, std::span<const math::VectorD> inputs,
                             std::span<const double> final_hidden_grad, CellGradients& grads,
                             std::vector<math::VectorD>* input_grads) const {
  const std::size_t n = inputs.size();
  const std::size_t h = hidden_;
  if (trace.hidden.size() != n || final_hidden_grad.size() != h)
    throw std::invalid_argument("recurrent backprop: shape mismatch");
  if (input_grads) input_grads->assign(n, math::VectorD(input_, 0.0));

  math::VectorD zeros(h, 0.0);
  math::VectorD dh(final_hidden_grad.begin(), final_hidden_grad.end());
  math::VectorD dc(h, 0.0);
  math::VectorD da(gate_count() * h);
  math::VectorD joint(h + input_);
  math::VectorD djoint(h + input_);

  for (std::size_t step = n; step-- > 0;) {
    const auto& h_prev = step == 0 ? zeros : trace.hidden[step - 1];
    if (kind_ == CellKind::lstm) {
      const auto& gates = trace.gates[step];
      const auto& c = trace.cell[step];
      const auto& c_prev = step == 0 ? zeros : trace.cell[step - 1];
      for (std::size_t k = 0; k < h; ++k) {
        const double i = gates[k];
        const double f = gates[h + k];
        const double g = gates[2 * h + k];
        const double o = gates[3 * h + k];
        const double tc = std::tanh(c[k]);
        const double dcell = dc[k] + dh[k] * o * (1.0 - tc * tc);
        da[k] = dcell * g * i * (1.0 - i);
        da[h + k] = dcell * c_prev[k] * f * (1.0 - f);
        da[2 * h + k] = dcell * i * (1.0 - g * g);
        da[3 * h + k] = dh[k] * tc * o * (1.0 - o);
        dc[k] = dcell * f;
      }
    } else {
      const auto& hid = trace.hidden[step];
      for (std::size_t k = 0; k < h; ++k) da[k] = dh[k] * (1.0 - hid[k] * hid[k]);
    }

    fill_joint(joint, h_prev, inputs[step]);
    math::outer_accumulate(grads.weights, da, joint);
    for (std::size_t k = 0; k < da.size(); ++k) grads.bias[k] += da[k];

    std::fill(djoint.begin(), djoint.end(), 0.0);
    math::gemv_transpose_accumulate(weights_, da, djoint);
    std::copy(djoint.begin(), djoint.begin() + static_cast<std::ptrdiff_t>(h), dh.begin());
    if (input_grads)
      std::copy(djoint.begin() + static_cast<std::ptrdiff_t>(h), djoint.end(),
                (*input_grads)[step].begin());
  }
}

LstmState lstm_step(std::span<const double> input, std::span<const double> hidden_prev,
                    std::span<const double> cell_prev, const RecurrentCell& params) {
  if (params.kind() != CellKind::lstm) throw std::invalid_argument("lstm_step: not an LSTM cell");
  check_step_shapes(params, input, hidden_prev);
  if (cell_prev.size() != params.hidden_size())
    throw std::invalid_argument("lstm_step: cell state shape mismatch");
  math::VectorD joint(params.hidden_size() + params.input_size());
  fill_joint(joint, hidden_prev, input);
  math::VectorD a = affine(params, joint);
  LstmState out{math::VectorD(params.hidden_size()), math::VectorD(params.hidden_size())};
  lstm_activate(params.hidden_size(), a, cell_prev, out.cell, out.hidden);
  return out;
}

math::VectorD rnn_step(std::span<const double> input, std::span<const double> hidden_prev,
                       const RecurrentCell& params) {
  if (params.kind() != CellKind::rnn) throw std::invalid_argument("rnn_step: not an RNN cell");
  check_step_shapes(params, input, hidden_prev);
  math::VectorD joint(params.hidden_size() + params.input_size());
  fill_joint(joint, hidden_prev, input);
  math::VectorD a = affine(params, joint);
  math::tanh_inplace(a);
  return a;
}

}  // namespace ood::embed
