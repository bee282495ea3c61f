// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ood/math/activations.hpp"
#include "ood/math/grad_check.hpp"
#include "ood/math/init.hpp"
#include "ood/math/matrix.hpp"
#include "ood/math/rng.hpp"

namespace ood::math {

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

void sigmoid_inplace(std::span<double> v) noexcept {
  for (double& x : v) x = sigmoid(x);
}

void tanh_inplace(std::span<double> v) noexcept {
  for (double& x : v) x = std::tanh(x);
}

VectorD sigmoid(std::span<const double> v) {
  VectorD out(v.begin(), v.end());
  sigmoid_inplace(out);
  return out;
}

VectorD tanh(std::span<const double> v) {
  VectorD out(v.begin(), v.end());
  tanh_inplace(out);
  return out;
}

VectorD softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  if (!all_finite(logits)) throw std::domain_error("softmax: non-finite input");
  const double peak = *std::max_element(logits.begin(), logits.end());
  VectorD out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: zero bound");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % bound;
}

Rng Rng::fork(std::uint64_t stream) const {
  // splitmix64 finaliser over (seed, stream) decorrelates child seeds.
  std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return Rng(z ^ (z >> 31));
}

void uniform_fill(std::span<float> values, double bound, Rng& rng) {
  for (float& x : values) x = static_cast<float>(rng.uniform(-bound, bound));
}

void glorot_uniform(std::span<float> values, std::size_t fan_in,
                    std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  uniform_fill(values, limit, rng);
}

namespace {

template <typename T>
GradCheckResult grad_check_impl(const std::function<double()>& loss,
                                std::span<T> params,
                                std::span<const double> analytic,
                                double epsilon, std::size_t samples, Rng& rng) {
  if (params.size() != analytic.size())
    throw std::invalid_argument("grad_check: gradient size mismatch");
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3))
    throw std::invalid_argument("grad_check: epsilon outside [1e-6, 1e-3]");

  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (samples < coords.size()) {
    rng.shuffle(std::span<std::size_t>(coords));
    coords.resize(samples);
  }

  GradCheckResult result;
  for (std::size_t idx : coords) {
    const T original = params[idx];
    const T plus = static_cast<T>(static_cast<double>(original) + epsilon);
    const T minus = static_cast<T>(static_cast<double>(original) - epsilon);

    params[idx] = plus;
    const double loss_plus = loss();
    params[idx] = minus;
    const double loss_minus = loss();
    params[idx] = original;

    if (!std::isfinite(loss_plus) || !std::isfinite(loss_minus))
      throw std::domain_error("grad_check: non-finite loss");

    const double step = static_cast<double>(plus) - static_cast<double>(minus);
    const double numeric = (loss_plus - loss_minus) / step;
    const double a = analytic[idx];
    const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.coordinates;
  }
  return result;
}

}  // namespace

GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<float> params,
                           std::span<const double> analytic, double epsilon,
                           std::size_t samples, Rng& rng) {
  return grad_check_impl(loss, params, analytic, epsilon, samples, rng);
}

GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<double> params,
                           std::span<const double> analytic, double epsilon,
                           std::size_t samples, Rng& rng) {
  return grad_check_impl(loss, params, analytic, epsilon, samples, rng);
}

}  // namespace ood::math
