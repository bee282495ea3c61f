// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ood/corpus/corpus.hpp"
#include "ood/embed/embedding.hpp"
#include "ood/embed/recurrent.hpp"
#include "ood/math/embedding_matrix.hpp"
#include "ood/math/matrix.hpp"
#include "ood/math/optimizer.hpp"
#include "ood/math/rng.hpp"

namespace ood::embed {

/// Raised when training produces a non-finite loss or parameter.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sentence embedding: concatenated final hidden states of the forward and
/// backward directions (m = 2h values, each in (-1, 1)).
struct SentenceRepresentation {
  math::VectorD values;
  std::size_t sentence_id = 0;
};

struct ClassifierOutput {
  math::VectorD probabilities;  // softmax over domain categories
  SentenceRepresentation representation;
};

/// Bidirectional recurrent domain-category classifier over two-channel word
/// embeddings. The forward direction reads tokens left to right, the backward
/// one right to left; the representation is [h_fwd(n), h_bwd(n)], where the
/// backward "last" state is the one after consuming the first token.
class BiLstmClassifier {
 public:
  struct Gradients {
    CellGradients forward;
    CellGradients backward;
    math::MatrixD output_weights;
    math::VectorD output_bias;
    math::MatrixD tuned_embedding;  // k x v, empty when the channel is frozen/absent

    void zero();
    double squared_norm() const;
    void scale(double factor);
  };

  BiLstmClassifier(TwoChannelEmbedding embedding, CellKind cell, std::size_t hidden,
                   std::vector<std::string> labels, double dropout, math::Rng& rng);
  BiLstmClassifier(TwoChannelEmbedding embedding, RecurrentCell forward_cell,
                   RecurrentCell backward_cell, math::Matrix output_weights,
                   math::Vector output_bias, std::vector<std::string> labels, double dropout);

  CellKind cell_kind() const noexcept { return forward_.kind(); }
  EmbeddingMode mode() const noexcept { return embedding_.mode(); }
  std::size_t hidden_size() const noexcept { return forward_.hidden_size(); }
  std::size_t representation_size() const noexcept { return 2 * hidden_size(); }
  std::size_t num_classes() const noexcept { return labels_.size(); }
  double dropout() const noexcept { return dropout_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t label_index(const std::string& label) const;

  const TwoChannelEmbedding& embedding() const noexcept { return embedding_; }
  TwoChannelEmbedding& embedding() noexcept { return embedding_; }
  const RecurrentCell& forward_cell() const noexcept { return forward_; }
  RecurrentCell& forward_cell() noexcept { return forward_; }
  const RecurrentCell& backward_cell() const noexcept { return backward_; }
  RecurrentCell& backward_cell() noexcept { return backward_; }
  const math::Matrix& output_weights() const noexcept { return output_weights_; }
  math::Matrix& output_weights() noexcept { return output_weights_; }
  const math::Vector& output_bias() const noexcept { return output_bias_; }
  math::Vector& output_bias() noexcept { return output_bias_; }

  /// Throws std::invalid_argument for an empty sentence and std::out_of_range
  /// for a token index >= k. Dropout is applied only when train_mode is set
  /// (then `rng` is required).
  ClassifierOutput forward(std::span<const std::size_t> tokens, bool train_mode,
                           math::Rng* rng) const;

  Gradients make_gradients() const;

  /// Cross-entropy -ln y[label] for one sentence; adds `scale` times its
  /// gradient into `grads`. Dropout follows `train_mode`.
  double accumulate_gradients(std::span<const std::size_t> tokens, std::size_t label,
                              Gradients& grads, bool train_mode, math::Rng* rng,
                              double scale = 1.0) const;

  /// Inference-mode cross-entropy.
  double loss(std::span<const std::size_t> tokens, std::size_t label) const;
  std::size_t predict(std::span<const std::size_t> tokens) const;

 private:
  struct Pass;
  Pass run(std::span<const std::size_t> tokens, bool train_mode, math::Rng* rng) const;

  TwoChannelEmbedding embedding_;
  RecurrentCell forward_;
  RecurrentCell backward_;
  math::Matrix output_weights_;  // |D| x 2h
  math::Vector output_bias_;     // |D|
  std::vector<std::string> labels_;
  double dropout_ = 0.5;
};

struct ClassifierConfig {
  CellKind cell = CellKind::lstm;
  EmbeddingMode mode = EmbeddingMode::two_channel;
  std::size_t hidden = 100;
  double dropout = 0.5;
  math::OptimizerConfig optimizer = math::OptimizerConfig::defaults(math::OptimizerKind::adam);
  std::size_t max_epochs = 20;
  std::size_t min_epochs = 10;
  std::size_t patience = 3;  // epochs without validation-accuracy gain
  std::size_t batch_size = 16;
  double clip_norm = 5.0;  // global gradient norm
  std::uint64_t seed = 42;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;           // mean train-mode cross-entropy
  double validation_accuracy = 0.0;  // NaN without a validation set
};

struct TrainingReport {
  std::vector<EpochStats> epochs;
};

/// Trains the classifier with full BPTT per sentence and mini-batch updates.
/// Embedding gradients reach only the trainable channel. Throws
/// std::invalid_argument when a training sentence carries no label and
/// NumericError when the loss becomes non-finite.
BiLstmClassifier train_classifier(std::span<const corpus::LabeledSentence> train,
                                  std::span<const corpus::LabeledSentence> validation,
                                  const corpus::Vocabulary& vocab,
                                  const math::EmbeddingMatrix& pretrained,
                                  const ClassifierConfig& config,
                                  TrainingReport* report = nullptr);

ClassifierOutput forward_classify(std::span<const std::size_t> tokens,
                                  const BiLstmClassifier& model, bool train_mode,
                                  math::Rng* rng);

/// Dropout-free, deterministic representation.
SentenceRepresentation embed_sentence(std::span<const std::size_t> tokens,
                                      const BiLstmClassifier& model);

/// Fraction of labeled sentences whose argmax class matches the label.
double domain_accuracy(const BiLstmClassifier& model, const corpus::Vocabulary& vocab,
                       std::span<const corpus::LabeledSentence> sentences);

}  // namespace ood::embed
