// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ood/corpus/corpus.hpp"
#include "ood/math/embedding_matrix.hpp"
#include "ood/math/matrix.hpp"

namespace ood::baselines {

/// (column, weight) pairs with strictly increasing columns and nonzero weights.
class SparseVector {
 public:
  using Entry = std::pair<std::size_t, double>;

  SparseVector() = default;
  /// Sorts, merges duplicate columns by summation and drops zeros.
  static SparseVector from_entries(std::vector<Entry> entries);
  /// Nonzero coordinates of a dense vector.
  static SparseVector from_dense(std::span<const double> values);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  double squared_norm() const;
  math::VectorD to_dense(std::size_t width) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Contiguous n-grams of one sentence for n = 1..n_max, joined with a space.
std::vector<std::string> sentence_ngrams(std::span<const std::string> tokens, std::size_t n_max);

/// Column index over the n-grams of the training sentences, with document
/// frequencies for IDF weighting.
class NgramIndex {
 public:
  NgramIndex() = default;

  /// n_max must be 1, 2 or 3. With max_features > 0 only the most frequent
  /// n-grams (document frequency desc, then lexicographic) are kept.
  static NgramIndex build(std::span<const corpus::Tokens> sentences, std::size_t n_max,
                          std::size_t max_features = 0);
  /// Reassembles an index from stored columns.
  NgramIndex(std::size_t n_max, std::size_t documents, std::vector<std::string> ngrams,
             std::vector<std::size_t> document_frequency);

  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t size() const noexcept { return ngrams_.size(); }
  std::size_t documents() const noexcept { return documents_; }
  std::optional<std::size_t> column(std::string_view ngram) const;
  const std::string& ngram(std::size_t column) const { return ngrams_.at(column); }
  std::size_t document_frequency(std::size_t column) const { return df_.at(column); }
  const std::vector<std::string>& ngrams() const noexcept { return ngrams_; }
  const std::vector<std::size_t>& document_frequencies() const noexcept { return df_; }

 private:
  std::size_t n_max_ = 1;
  std::size_t documents_ = 0;
  std::vector<std::string> ngrams_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> columns_;
};

/// Raw n-gram counts; n-grams missing from the index are dropped.
SparseVector bow_vector(std::span<const std::string> tokens, const NgramIndex& index);

/// tf * ln(N / df) with N the number of indexed training sentences. An n-gram
/// present in every training sentence has weight 0 and is dropped.
SparseVector tfidf_vector(std::span<const std::string> tokens, const NgramIndex& index);

/// Mean of the word vectors of the sentence (the UNK column for unseen words).
/// Throws std::invalid_argument for an empty sentence.
math::VectorD neural_bow(std::span<const std::size_t> tokens, const math::EmbeddingMatrix& E);

}  // namespace ood::baselines
