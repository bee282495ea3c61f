// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "ood/math/embedding_matrix.hpp"
#include "ood/math/matrix.hpp"
#include "ood/math/rng.hpp"

namespace ood::embed {

/// How word vectors enter the recurrent network.
///   random      one trainable channel, U[-0.25, 0.25] initialisation
///   static      one frozen channel initialised from pre-trained vectors
///   non-static  one trainable channel initialised from pre-trained vectors
///   two-channel frozen + trainable channels, concatenated per token
enum class EmbeddingMode { random, static_only, non_static, two_channel };

EmbeddingMode parse_embedding_mode(std::string_view name);
std::string to_string(EmbeddingMode mode);

/// Inverted dropout: each coordinate is zeroed with probability `rate` and
/// survivors are scaled by 1/(1-rate). Returns the per-coordinate scale that
/// was applied (needed for backpropagation).
math::VectorD apply_dropout(std::span<double> values, double rate, math::Rng& rng);

class TwoChannelEmbedding {
 public:
  TwoChannelEmbedding() = default;
  /// `pretrained` seeds the static and/or non-static channels; in random mode
  /// only its shape is used and `rng` draws the initial values.
  TwoChannelEmbedding(EmbeddingMode mode, const math::EmbeddingMatrix& pretrained,
                      math::Rng& rng);
  /// Reassembles an embedding from stored channels (archive loading).
  TwoChannelEmbedding(EmbeddingMode mode, std::optional<math::EmbeddingMatrix> static_channel,
                      std::optional<math::EmbeddingMatrix> tuned_channel);

  EmbeddingMode mode() const noexcept { return mode_; }
  std::size_t dim() const noexcept;
  std::size_t vocab_size() const noexcept;
  /// Width of one looked-up token vector: 2v in two-channel mode, else v.
  std::size_t width() const noexcept;

  bool has_static() const noexcept { return static_.has_value(); }
  bool has_tuned() const noexcept { return tuned_.has_value(); }
  const math::EmbeddingMatrix& static_channel() const { return static_.value(); }
  const math::EmbeddingMatrix& tuned_channel() const { return tuned_.value(); }
  math::EmbeddingMatrix& tuned_channel() { return tuned_.value(); }

  /// Concatenation [E_s w, E_n w] (only the existing channels). Throws
  /// std::out_of_range for an index >= k.
  math::VectorD lookup(std::size_t word) const;

  /// Offset of the trainable channel inside a looked-up vector.
  std::size_t tuned_offset() const noexcept { return static_ ? dim() : 0; }

 private:
  EmbeddingMode mode_ = EmbeddingMode::two_channel;
  std::optional<math::EmbeddingMatrix> static_;
  std::optional<math::EmbeddingMatrix> tuned_;
};

/// Token lookup with optional train-mode dropout applied independently to
/// every coordinate of each channel half. `dropout_scale`, when non-null,
/// receives the applied scales.
math::VectorD lookup_two_channel(std::size_t word, const TwoChannelEmbedding& embedding,
                                 bool train_mode, double dropout_rate, math::Rng* rng,
                                 math::VectorD* dropout_scale = nullptr);

}  // namespace ood::embed
