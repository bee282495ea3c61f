// SPDX-License-Identifier: Apache-2.0
#include "ood/embed/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ood/math/activations.hpp"
#include "ood/math/init.hpp"
#include "ood/util/log.hpp"

namespace ood::embed {

void BiLstmClassifier::Gradients::zero() {
  forward.zero();
  backward.zero();
  output_weights.set_zero();
  std::fill(output_bias.begin(), output_bias.end(), 0.0);
  tuned_embedding.set_zero();
}

namespace {

double sum_squares(std::span<const double> v) { return math::squared_norm(v); }

void scale_values(std::span<double> v, double factor) {
  for (double& x : v) x *= factor;
}

}  // namespace

double BiLstmClassifier::Gradients::squared_norm() const {
  return sum_squares(forward.weights.values()) + sum_squares(forward.bias) +
         sum_squares(backward.weights.values()) + sum_squares(backward.bias) +
         sum_squares(output_weights.values()) + sum_squares(output_bias) +
         sum_squares(tuned_embedding.values());
}

void BiLstmClassifier::Gradients::scale(double factor) {
  scale_values(forward.weights.values(), factor);
  scale_values(forward.bias, factor);
  scale_values(backward.weights.values(), factor);
  scale_values(backward.bias, factor);
  scale_values(output_weights.values(), factor);
  scale_values(output_bias, factor);
  scale_values(tuned_embedding.values(), factor);
}

BiLstmClassifier::BiLstmClassifier(TwoChannelEmbedding embedding, CellKind cell,
                                   std::size_t hidden, std::vector<std::string> labels,
                                   double dropout, math::Rng& rng)
    : embedding_(std::move(embedding)),
      forward_(cell, hidden, embedding_.width()),
      backward_(cell, hidden, embedding_.width()),
      output_weights_(labels.size(), 2 * hidden),
      output_bias_(labels.size(), 0.0f),
      labels_(std::move(labels)),
      dropout_(dropout) {
  if (labels_.empty()) throw std::invalid_argument("classifier needs at least one label");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
  forward_.initialize(rng);
  backward_.initialize(rng);
  math::glorot_uniform(output_weights_, rng);
}

BiLstmClassifier::BiLstmClassifier(TwoChannelEmbedding embedding, RecurrentCell forward_cell,
                                   RecurrentCell backward_cell, math::Matrix output_weights,
                                   math::Vector output_bias, std::vector<std::string> labels,
                                   double dropout)
    : embedding_(std::move(embedding)),
      forward_(std::move(forward_cell)),
      backward_(std::move(backward_cell)),
      output_weights_(std::move(output_weights)),
      output_bias_(std::move(output_bias)),
      labels_(std::move(labels)),
      dropout_(dropout) {
  const std::size_t h = forward_.hidden_size();
  if (forward_.kind() != backward_.kind() || backward_.hidden_size() != h ||
      forward_.input_size() != embedding_.width() || backward_.input_size() != embedding_.width())
    throw std::invalid_argument("classifier: recurrent cell shapes inconsistent");
  if (!output_weights_.same_shape(labels_.size(), 2 * h) || output_bias_.size() != labels_.size())
    throw std::invalid_argument("classifier: output layer shape mismatch");
}

std::size_t BiLstmClassifier::label_index(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::invalid_argument("unknown domain label: " + label);
  return static_cast<std::size_t>(it - labels_.begin());
}

struct BiLstmClassifier::Pass {
  std::vector<math::VectorD> inputs;  // left-to-right, after dropout
  std::vector<math::VectorD> input_scales;
  std::vector<math::VectorD> reversed;
  RecurrentCell::Trace fwd;
  RecurrentCell::Trace bwd;
  math::VectorD representation;  // before dropout
  math::VectorD rep_scale;
  math::VectorD rep_dropped;
  math::VectorD logits;
  math::VectorD probabilities;
};

BiLstmClassifier::Pass BiLstmClassifier::run(std::span<const std::size_t> tokens,
                                             bool train_mode, math::Rng* rng) const {
  if (tokens.empty()) throw std::invalid_argument("classifier: empty sentence");
  const bool dropout = train_mode && dropout_ > 0.0;
  if (dropout && !rng) throw std::invalid_argument("classifier: train mode requires an rng");

  Pass pass;
  const std::size_t n = tokens.size();
  pass.inputs.reserve(n);
  pass.input_scales.reserve(n);
  for (auto w : tokens) {
    math::VectorD scale;
    pass.inputs.push_back(lookup_two_channel(w, embedding_, dropout, dropout_, rng, &scale));
    pass.input_scales.push_back(std::move(scale));
  }
  pass.reversed.assign(pass.inputs.rbegin(), pass.inputs.rend());

  pass.fwd = forward_.run(pass.inputs);
  pass.bwd = backward_.run(pass.reversed);

  const std::size_t h = hidden_size();
  pass.representation.reserve(2 * h);
  const auto& hf = pass.fwd.hidden.back();
  const auto& hb = pass.bwd.hidden.back();
  pass.representation.insert(pass.representation.end(), hf.begin(), hf.end());
  pass.representation.insert(pass.representation.end(), hb.begin(), hb.end());

  pass.rep_dropped = pass.representation;
  if (dropout)
    pass.rep_scale = apply_dropout(pass.rep_dropped, dropout_, *rng);
  else
    pass.rep_scale.assign(2 * h, 1.0);

  pass.logits.assign(output_bias_.begin(), output_bias_.end());
  math::gemv_accumulate(output_weights_, pass.rep_dropped, pass.logits);
  pass.probabilities = math::softmax(pass.logits);
  return pass;
}

ClassifierOutput BiLstmClassifier::forward(std::span<const std::size_t> tokens,
                                           bool train_mode, math::Rng* rng) const {
  Pass pass = run(tokens, train_mode, rng);
  return {std::move(pass.probabilities), {std::move(pass.representation), 0}};
}

BiLstmClassifier::Gradients BiLstmClassifier::make_gradients() const {
  Gradients g{forward_.make_gradients(), backward_.make_gradients(),
              math::MatrixD(output_weights_.rows(), output_weights_.cols()),
              math::VectorD(output_bias_.size(), 0.0),
              {}};
  if (embedding_.has_tuned())
    g.tuned_embedding = math::MatrixD(embedding_.vocab_size(), embedding_.dim());
  return g;
}

namespace {

double cross_entropy(std::span<const double> logits, std::size_t label) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  return peak + std::log(total) - logits[label];
}

}  // namespace

double BiLstmClassifier::accumulate_gradients(std::span<const std::size_t> tokens,
                                              std::size_t label, Gradients& grads,
                                              bool train_mode, math::Rng* rng,
                                              double scale) const {
  if (label >= num_classes()) throw std::out_of_range("classifier: label index out of range");
  Pass pass = run(tokens, train_mode, rng);
  const double loss = cross_entropy(pass.logits, label);

  const std::size_t h = hidden_size();
  math::VectorD dlogits = pass.probabilities;
  dlogits[label] -= 1.0;
  for (double& d : dlogits) d *= scale;

  math::outer_accumulate(grads.output_weights, dlogits, pass.rep_dropped);
  for (std::size_t k = 0; k < dlogits.size(); ++k) grads.output_bias[k] += dlogits[k];

  math::VectorD drep(2 * h, 0.0);
  math::gemv_transpose_accumulate(output_weights_, dlogits, drep);
  for (std::size_t k = 0; k < drep.size(); ++k) drep[k] *= pass.rep_scale[k];

  const bool tuned = embedding_.has_tuned();
  std::vector<math::VectorD> dx_fwd, dx_bwd;
  forward_.backprop(pass.fwd, pass.inputs, std::span<const double>(drep).first(h),
                    grads.forward, tuned ? &dx_fwd : nullptr);
  backward_.backprop(pass.bwd, pass.reversed, std::span<const double>(drep).subspan(h, h),
                     grads.backward, tuned ? &dx_bwd : nullptr);

  if (tuned) {
    const std::size_t n = tokens.size();
    const std::size_t offset = embedding_.tuned_offset();
    const std::size_t v = embedding_.dim();
    for (std::size_t t = 0; t < n; ++t) {
      const auto& df = dx_fwd[t];
      const auto& db = dx_bwd[n - 1 - t];
      const auto& s = pass.input_scales[t];
      auto row = grads.tuned_embedding.row(tokens[t]);
      for (std::size_t d = 0; d < v; ++d)
        row[d] += (df[offset + d] + db[offset + d]) * s[offset + d];
    }
  }
  return loss;
}

double BiLstmClassifier::loss(std::span<const std::size_t> tokens, std::size_t label) const {
  if (label >= num_classes()) throw std::out_of_range("classifier: label index out of range");
  const Pass pass = run(tokens, false, nullptr);
  return cross_entropy(pass.logits, label);
}

std::size_t BiLstmClassifier::predict(std::span<const std::size_t> tokens) const {
  const auto out = forward(tokens, false, nullptr);
  return static_cast<std::size_t>(
      std::max_element(out.probabilities.begin(), out.probabilities.end()) -
      out.probabilities.begin());
}

ClassifierOutput forward_classify(std::span<const std::size_t> tokens,
                                  const BiLstmClassifier& model, bool train_mode,
                                  math::Rng* rng) {
  return model.forward(tokens, train_mode, rng);
}

SentenceRepresentation embed_sentence(std::span<const std::size_t> tokens,
                                      const BiLstmClassifier& model) {
  return model.forward(tokens, false, nullptr).representation;
}

double domain_accuracy(const BiLstmClassifier& model, const corpus::Vocabulary& vocab,
                       std::span<const corpus::LabeledSentence> sentences) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& s : sentences) {
    if (!s.label) continue;
    ++total;
    const auto tokens = vocab.encode(s.tokens);
    const auto it = std::find(model.labels().begin(), model.labels().end(), *s.label);
    if (it == model.labels().end()) continue;
    if (model.predict(tokens) == static_cast<std::size_t>(it - model.labels().begin())) ++correct;
  }
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

struct ParamSlot {
  std::span<float> values;
  std::span<const double> grads;
  math::OptimizerState state;
};

struct Encoded {
  std::vector<std::size_t> tokens;
  std::size_t label;
};

}  // namespace

BiLstmClassifier train_classifier(std::span<const corpus::LabeledSentence> train,
                                  std::span<const corpus::LabeledSentence> validation,
                                  const corpus::Vocabulary& vocab,
                                  const math::EmbeddingMatrix& pretrained,
                                  const ClassifierConfig& config, TrainingReport* report) {
  if (train.empty()) throw std::invalid_argument("train_classifier: empty training set");
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train[i].label)
      throw std::invalid_argument("train_classifier: training sentence " + std::to_string(i) +
                                  " has no label");
    if (train[i].origin != corpus::Origin::in_domain)
      throw std::invalid_argument("train_classifier: OOD sentence in training data");
  }
  if (pretrained.vocab_size() != vocab.size())
    throw std::invalid_argument("train_classifier: embedding/vocabulary size mismatch");
  if (config.batch_size == 0) throw std::invalid_argument("train_classifier: zero batch size");

  const math::Rng root(config.seed);
  math::Rng init_rng = root.fork(1);
  math::Rng shuffle_rng = root.fork(2);
  math::Rng dropout_rng = root.fork(3);

  TwoChannelEmbedding embedding(config.mode, pretrained, init_rng);
  BiLstmClassifier model(std::move(embedding), config.cell, config.hidden,
                         corpus::domain_labels(train), config.dropout, init_rng);

  std::vector<Encoded> data;
  data.reserve(train.size());
  for (const auto& s : train) data.push_back({vocab.encode(s.tokens), model.label_index(*s.label)});

  auto grads = model.make_gradients();
  std::vector<ParamSlot> slots;
  auto add_slot = [&](std::span<float> values, std::span<const double> g) {
    slots.push_back({values, g, math::OptimizerState(config.optimizer, values.size())});
  };
  add_slot(model.forward_cell().weights().values(), grads.forward.weights.values());
  add_slot(model.forward_cell().bias(), grads.forward.bias);
  add_slot(model.backward_cell().weights().values(), grads.backward.weights.values());
  add_slot(model.backward_cell().bias(), grads.backward.bias);
  add_slot(model.output_weights().values(), grads.output_weights.values());
  add_slot(model.output_bias(), grads.output_bias);
  if (model.embedding().has_tuned())
    add_slot(model.embedding().tuned_channel().storage().values(), grads.tuned_embedding.values());

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_accuracy = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      grads.zero();
      for (std::size_t k = start; k < stop; ++k) {
        const auto& ex = data[order[k]];
        epoch_loss +=
            model.accumulate_gradients(ex.tokens, ex.label, grads, true, &dropout_rng, scale);
      }
      const double norm = std::sqrt(grads.squared_norm());
      if (!std::isfinite(norm) || !std::isfinite(epoch_loss))
        throw NumericError("train_classifier: non-finite loss or gradient at epoch " +
                           std::to_string(epoch));
      if (config.clip_norm > 0.0 && norm > config.clip_norm) grads.scale(config.clip_norm / norm);
      for (auto& slot : slots) slot.state.step(slot.values, slot.grads);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(data.size());
    stats.validation_accuracy = domain_accuracy(model, vocab, validation);
    if (report) report->epochs.push_back(stats);
    {
      std::ostringstream msg;
      msg << "train-embed epoch " << epoch << " loss " << stats.train_loss
          << " val_acc " << stats.validation_accuracy;
      util::log_info(msg.str());
    }

    if (validation.empty()) continue;
    if (stats.validation_accuracy > best_accuracy) {
      best_accuracy = stats.validation_accuracy;
      stale = 0;
    } else {
      ++stale;
    }
    if (epoch >= config.min_epochs && stale >= config.patience) break;
  }
  return model;
}

}  // namespace ood::embed
