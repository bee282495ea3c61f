// SPDX-License-Identifier: Apache-2.0
#include "ood/word2vec/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ood/math/activations.hpp"

namespace ood::w2v {

NoiseTable::NoiseTable(std::span<const std::uint64_t> counts, double power) {
  weights_.reserve(counts.size());
  cumulative_.reserve(counts.size());
  double total = 0.0;
  for (auto c : counts) {
    const double w = c == 0 ? 0.0 : std::pow(static_cast<double>(c), power);
    weights_.push_back(w);
    total += w;
    cumulative_.push_back(total);
  }
}

std::size_t NoiseTable::sample(math::Rng& rng, std::size_t exclude) const {
  const std::size_t k = weights_.size();
  if (k < 2) throw std::invalid_argument("negative_sample: need at least 2 words");
  if (exclude >= k) throw std::out_of_range("negative_sample: exclude out of range");

  const double total = cumulative_.back() - weights_[exclude];
  if (!(total > 0.0)) {
    const auto pick = static_cast<std::size_t>(rng.below(k - 1));
    return pick >= exclude ? pick + 1 : pick;
  }
  // Draw over the distribution with `exclude` removed, then shift past it.
  double u = rng.uniform() * total;
  const double before = exclude == 0 ? 0.0 : cumulative_[exclude - 1];
  if (u >= before) u += weights_[exclude];
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t index = it == cumulative_.end() ? k - 1
                                              : static_cast<std::size_t>(it - cumulative_.begin());
  // Guard the rounding edge cases: never return `exclude` or a zero weight.
  while (index == exclude || weights_[index] == 0.0) index = index == 0 ? k - 1 : index - 1;
  return index;
}

double scheduled_learning_rate(double lr0, double min_ratio, double progress) {
  const double p = std::clamp(progress, 0.0, 1.0);
  return std::max(lr0 * (1.0 - p), lr0 * min_ratio);
}

std::vector<std::pair<std::size_t, std::size_t>> positive_pairs(
    std::span<const std::size_t> sentence, std::size_t window) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t n = sentence.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(n, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j)
      if (j != i) pairs.emplace_back(sentence[i], sentence[j]);
  }
  return pairs;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: size mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

SkipGramModel train_skipgram_model(std::span<const Sequence> corpus, std::size_t vocab_size,
                                   const SkipGramConfig& config, std::uint64_t seed,
                                   SkipGramStats* stats) {
  if (vocab_size < 2) throw std::invalid_argument("train_skipgram: vocabulary size < 2");
  if (config.dim == 0) throw std::invalid_argument("train_skipgram: zero dimension");
  std::size_t total_tokens = 0;
  std::vector<std::uint64_t> counts(vocab_size, 0);
  for (const auto& s : corpus) {
    for (auto w : s) {
      if (w >= vocab_size) throw std::out_of_range("train_skipgram: token index >= k");
      ++counts[w];
    }
    total_tokens += s.size();
  }
  if (total_tokens == 0) throw std::invalid_argument("train_skipgram: empty corpus");

  const NoiseTable noise(counts);
  math::Rng rng(seed);
  const std::size_t dim = config.dim;

  SkipGramModel model{math::EmbeddingMatrix(dim, vocab_size),
                      math::EmbeddingMatrix(dim, vocab_size), config};
  // word2vec initialisation: inputs U[-0.5/dim, 0.5/dim], outputs zero.
  for (float& x : model.input_vectors.storage().values())
    x = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));

  const double total_updates = static_cast<double>(total_tokens * config.epochs);
  std::size_t processed = 0;
  std::vector<double> center(dim);
  std::vector<double> center_grad(dim);
  SkipGramStats local;
  double lr = config.learning_rate;

  auto update = [&](std::size_t context, double label) {
    auto out = model.output_vectors.column(context);
    double score = 0.0;
    for (std::size_t d = 0; d < dim; ++d) score += center[d] * out[d];
    const double g = (label - math::sigmoid(score)) * lr;
    for (std::size_t d = 0; d < dim; ++d) {
      center_grad[d] += g * out[d];
      out[d] = static_cast<float>(out[d] + g * center[d]);
    }
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& sentence : corpus) {
      const std::size_t n = sentence.size();
      for (std::size_t i = 0; i < n; ++i) {
        lr = scheduled_learning_rate(config.learning_rate, config.min_learning_rate_ratio,
                                     static_cast<double>(processed) / total_updates);
        ++processed;
        const std::size_t lo = i > config.window ? i - config.window : 0;
        const std::size_t hi = std::min(n, i + config.window + 1);
        auto in = model.input_vectors.column(sentence[i]);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          const std::size_t context = sentence[j];
          std::copy(in.begin(), in.end(), center.begin());
          std::fill(center_grad.begin(), center_grad.end(), 0.0);
          update(context, 1.0);
          for (std::size_t neg = 0; neg < config.negatives; ++neg)
            update(noise.sample(rng, context), 0.0);
          for (std::size_t d = 0; d < dim; ++d) in[d] = static_cast<float>(in[d] + center_grad[d]);
          ++local.positive_updates;
        }
        ++local.center_words;
      }
    }
  }
  local.final_learning_rate = lr;
  if (stats) *stats = local;
  return model;
}

}  // namespace ood::w2v
