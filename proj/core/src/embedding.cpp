// SPDX-License-Identifier: Apache-2.0
#include "ood/embed/embedding.hpp"

#include <stdexcept>

#include "ood/math/init.hpp"

namespace ood::embed {

EmbeddingMode parse_embedding_mode(std::string_view name) {
  if (name == "random") return EmbeddingMode::random;
  if (name == "static") return EmbeddingMode::static_only;
  if (name == "non-static") return EmbeddingMode::non_static;
  if (name == "two-channel") return EmbeddingMode::two_channel;
  throw std::invalid_argument("unknown embedding mode: " + std::string(name));
}

std::string to_string(EmbeddingMode mode) {
  switch (mode) {
    case EmbeddingMode::random: return "random";
    case EmbeddingMode::static_only: return "static";
    case EmbeddingMode::non_static: return "non-static";
    case EmbeddingMode::two_channel: return "two-channel";
  }
  return "unknown";
}

math::VectorD apply_dropout(std::span<double> values, double rate, math::Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
  const double keep_scale = 1.0 / (1.0 - rate);
  math::VectorD scale(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    scale[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    values[i] *= scale[i];
  }
  return scale;
}

TwoChannelEmbedding::TwoChannelEmbedding(EmbeddingMode mode,
                                         const math::EmbeddingMatrix& pretrained,
                                         math::Rng& rng)
    : mode_(mode) {
  switch (mode) {
    case EmbeddingMode::random: {
      math::EmbeddingMatrix fresh(pretrained.dim(), pretrained.vocab_size());
      math::uniform_fill(fresh.storage().values(), 0.25, rng);
      tuned_ = std::move(fresh);
      break;
    }
    case EmbeddingMode::static_only: static_ = pretrained; break;
    case EmbeddingMode::non_static: tuned_ = pretrained; break;
    case EmbeddingMode::two_channel:
      static_ = pretrained;
      tuned_ = pretrained;
      break;
  }
}

TwoChannelEmbedding::TwoChannelEmbedding(EmbeddingMode mode,
                                         std::optional<math::EmbeddingMatrix> static_channel,
                                         std::optional<math::EmbeddingMatrix> tuned_channel)
    : mode_(mode), static_(std::move(static_channel)), tuned_(std::move(tuned_channel)) {
  const bool want_static =
      mode == EmbeddingMode::static_only || mode == EmbeddingMode::two_channel;
  const bool want_tuned = mode != EmbeddingMode::static_only;
  if (want_static != static_.has_value() || want_tuned != tuned_.has_value())
    throw std::invalid_argument("embedding channels do not match mode " + to_string(mode));
  if (static_ && tuned_ &&
      (static_->dim() != tuned_->dim() || static_->vocab_size() != tuned_->vocab_size()))
    throw std::invalid_argument("embedding channel shapes differ");
}

std::size_t TwoChannelEmbedding::dim() const noexcept {
  return static_ ? static_->dim() : tuned_ ? tuned_->dim() : 0;
}

std::size_t TwoChannelEmbedding::vocab_size() const noexcept {
  return static_ ? static_->vocab_size() : tuned_ ? tuned_->vocab_size() : 0;
}

std::size_t TwoChannelEmbedding::width() const noexcept {
  return dim() * ((static_ ? 1 : 0) + (tuned_ ? 1 : 0));
}

math::VectorD TwoChannelEmbedding::lookup(std::size_t word) const {
  if (word >= vocab_size()) throw std::out_of_range("embedding lookup: index >= k");
  math::VectorD out;
  out.reserve(width());
  if (static_) {
    auto col = static_->column(word);
    out.insert(out.end(), col.begin(), col.end());
  }
  if (tuned_) {
    auto col = tuned_->column(word);
    out.insert(out.end(), col.begin(), col.end());
  }
  return out;
}

math::VectorD lookup_two_channel(std::size_t word, const TwoChannelEmbedding& embedding,
                                 bool train_mode, double dropout_rate, math::Rng* rng,
                                 math::VectorD* dropout_scale) {
  math::VectorD v = embedding.lookup(word);
  if (train_mode && dropout_rate > 0.0) {
    if (!rng) throw std::invalid_argument("train-mode lookup needs an rng");
    auto scale = apply_dropout(v, dropout_rate, *rng);
    if (dropout_scale) *dropout_scale = std::move(scale);
  } else if (dropout_scale) {
    dropout_scale->assign(v.size(), 1.0);
  }
  return v;
}

}  // namespace ood::embed
