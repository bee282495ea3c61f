// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ood::math {

/// Dense row-major matrix. Parameters are stored as float32; gradients and
/// optimizer accumulators use the double instantiation.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }
  void set_zero() { fill(T{}); }

  bool same_shape(std::size_t rows, std::size_t cols) const noexcept {
    return rows_ == rows && cols_ == cols;
  }
  template <typename U>
  bool same_shape(const BasicMatrix<U>& other) const noexcept {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<float>;
using MatrixD = BasicMatrix<double>;
using Vector = std::vector<float>;
using VectorD = std::vector<double>;

/// y += W x, accumulated in double.
template <typename T>
void gemv_accumulate(const BasicMatrix<T>& weights, std::span<const double> x,
                     std::span<double> y) {
  if (weights.cols() != x.size() || weights.rows() != y.size())
    throw std::invalid_argument("gemv: shape mismatch");
  const std::size_t cols = weights.cols();
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    const T* w = weights.data() + r * cols;
    // Four independent partial sums; fixed order keeps results reproducible.
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      acc[0] += static_cast<double>(w[c]) * x[c];
      acc[1] += static_cast<double>(w[c + 1]) * x[c + 1];
      acc[2] += static_cast<double>(w[c + 2]) * x[c + 2];
      acc[3] += static_cast<double>(w[c + 3]) * x[c + 3];
    }
    for (; c < cols; ++c) acc[0] += static_cast<double>(w[c]) * x[c];
    y[r] += (acc[0] + acc[1]) + (acc[2] + acc[3]);
  }
}

/// x_grad += W^T y_grad.
template <typename T>
void gemv_transpose_accumulate(const BasicMatrix<T>& weights,
                               std::span<const double> y_grad,
                               std::span<double> x_grad) {
  if (weights.rows() != y_grad.size() || weights.cols() != x_grad.size())
    throw std::invalid_argument("gemv_transpose: shape mismatch");
  const std::size_t cols = weights.cols();
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    const double g = y_grad[r];
    if (g == 0.0) continue;
    const T* w = weights.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) x_grad[c] += static_cast<double>(w[c]) * g;
  }
}

/// G += a b^T.
inline void outer_accumulate(MatrixD& grad, std::span<const double> a,
                             std::span<const double> b) {
  if (grad.rows() != a.size() || grad.cols() != b.size())
    throw std::invalid_argument("outer: shape mismatch");
  const std::size_t cols = grad.cols();
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    const double s = a[r];
    if (s == 0.0) continue;
    double* g = grad.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) g[c] += s * b[c];
  }
}

inline VectorD to_double(std::span<const float> v) { return VectorD(v.begin(), v.end()); }

double squared_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v);
bool all_finite(std::span<const float> v);

}  // namespace ood::math
