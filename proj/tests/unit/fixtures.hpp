// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ood/corpus/corpus.hpp"
#include "ood/corpus/synthetic.hpp"
#include "ood/embed/classifier.hpp"
#include "ood/math/embedding_matrix.hpp"
#include "ood/math/rng.hpp"

namespace ood::testing {

inline math::EmbeddingMatrix random_embedding(std::size_t dim, std::size_t vocab,
                                              std::uint64_t seed, double bound = 0.5) {
  math::EmbeddingMatrix e(dim, vocab);
  math::Rng rng(seed);
  for (auto& x : e.storage().values()) x = static_cast<float>(rng.uniform(-bound, bound));
  return e;
}

inline embed::BiLstmClassifier small_classifier(embed::CellKind cell, embed::EmbeddingMode mode,
                                                std::size_t hidden, std::size_t classes,
                                                std::uint64_t seed, std::size_t dim = 4,
                                                std::size_t vocab = 9) {
  math::Rng rng(seed);
  const auto pretrained = random_embedding(dim, vocab, seed + 100);
  embed::TwoChannelEmbedding embedding(mode, pretrained, rng);
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < classes; ++c) labels.push_back("d" + std::to_string(c));
  embed::BiLstmClassifier model(std::move(embedding), cell, hidden, labels, 0.5, rng);
  // Non-zero biases so their gradients are exercised too.
  for (auto& b : model.output_bias()) b = static_cast<float>(rng.uniform(-0.5, 0.5));
  return model;
}

/// A small labelled synthetic corpus with its pre-training text.
struct SmallBenchmark {
  corpus::SyntheticBenchmark bench;
  corpus::Vocabulary vocab;
};

inline corpus::SyntheticSpec small_spec(std::uint64_t seed) {
  corpus::SyntheticSpec spec;
  spec.num_domains = 3;
  spec.ood_domains = 1;
  spec.keywords_per_domain = 12;
  spec.function_words = 10;
  spec.min_length = 3;
  spec.max_length = 8;
  spec.sentences_per_domain = 40;
  spec.ood_sentences_per_domain = 40;
  spec.background_sentences_per_domain = 40;
  spec.seed = seed;
  return spec;
}

}  // namespace ood::testing
