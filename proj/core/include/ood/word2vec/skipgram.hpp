// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ood/math/embedding_matrix.hpp"
#include "ood/math/rng.hpp"

namespace ood::w2v {

using Sequence = std::vector<std::size_t>;

struct SkipGramConfig {
  std::size_t dim = 100;
  std::size_t window = 5;  // context radius: 5 words on each side
  std::size_t negatives = 5;
  double learning_rate = 0.05;
  double min_learning_rate_ratio = 0.01;
  std::size_t epochs = 5;
};

/// Noise distribution proportional to count^power (word2vec uses 3/4).
class NoiseTable {
 public:
  explicit NoiseTable(std::span<const std::uint64_t> counts, double power = 0.75);

  std::size_t size() const noexcept { return weights_.size(); }
  double weight(std::size_t index) const { return weights_.at(index); }

  /// Draws an index != exclude, with probability proportional to its weight
  /// among the remaining indices. Falls back to uniform when every remaining
  /// weight is zero. Throws std::invalid_argument when size() < 2.
  std::size_t sample(math::Rng& rng, std::size_t exclude) const;

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // inclusive prefix sums
};

inline std::size_t negative_sample(math::Rng& rng, const NoiseTable& table,
                                   std::size_t exclude) {
  return table.sample(rng, exclude);
}

/// Linearly decayed learning rate after processing fraction `progress` of all
/// updates: lr0 * (1 - progress), floored at lr0 * min_ratio.
double scheduled_learning_rate(double lr0, double min_ratio, double progress);

/// (center, context) positive pairs of one sentence for a full window.
std::vector<std::pair<std::size_t, std::size_t>> positive_pairs(std::span<const std::size_t> sentence,
                                                                std::size_t window);

struct SkipGramModel {
  math::EmbeddingMatrix input_vectors;   // becomes E
  math::EmbeddingMatrix output_vectors;  // context vectors
  SkipGramConfig config;
};

struct SkipGramStats {
  std::size_t positive_updates = 0;
  std::size_t center_words = 0;
  double final_learning_rate = 0.0;
};

/// Skip-gram with negative sampling. Deterministic in `seed`.
/// Throws std::invalid_argument for an empty corpus, vocab_size < 2 or an
/// out-of-range index.
SkipGramModel train_skipgram_model(std::span<const Sequence> corpus, std::size_t vocab_size,
                                   const SkipGramConfig& config, std::uint64_t seed,
                                   SkipGramStats* stats = nullptr);

inline math::EmbeddingMatrix train_skipgram(std::span<const Sequence> corpus,
                                            std::size_t vocab_size,
                                            const SkipGramConfig& config,
                                            std::uint64_t seed) {
  return train_skipgram_model(corpus, vocab_size, config, seed).input_vectors;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b);

}  // namespace ood::w2v
