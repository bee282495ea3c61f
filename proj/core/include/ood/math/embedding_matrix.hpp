// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "ood/math/matrix.hpp"

namespace ood::math {

/// A v x k word-vector matrix whose i-th column represents word i.
///
/// Columns are stored contiguously (as rows of a k x v buffer) so a lookup is
/// a single span.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t dim, std::size_t vocab_size)
      : storage_(vocab_size, dim) {}

  std::size_t dim() const noexcept { return storage_.cols(); }
  std::size_t vocab_size() const noexcept { return storage_.rows(); }

  std::span<float> column(std::size_t word) {
    check(word);
    return storage_.row(word);
  }
  std::span<const float> column(std::size_t word) const {
    check(word);
    return storage_.row(word);
  }

  /// Word-major storage (k rows of v values), used by optimizers and archives.
  Matrix& storage() noexcept { return storage_; }
  const Matrix& storage() const noexcept { return storage_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  void check(std::size_t word) const {
    if (word >= storage_.rows())
      throw std::out_of_range("embedding index out of range");
  }

  Matrix storage_;
};

}  // namespace ood::math
