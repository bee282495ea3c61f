// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ood::baselines {

/// NN-d novelty score: the distance from x to its nearest training item,
/// divided by the distance from that item to its own nearest other training
/// item. Higher is more OOD-like. Ties resolve to the lowest index.
template <typename Item, typename Distance>
class NearestNeighborScorer {
 public:
  static constexpr double kDenominatorFloor = 1e-9;

  NearestNeighborScorer(std::vector<Item> training, Distance distance)
      : training_(std::move(training)), distance_(std::move(distance)) {
    if (training_.size() < 2)
      throw std::invalid_argument("nn-d: at least two training items are required");
    neighbor_distance_.assign(training_.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < training_.size(); ++i) {
      for (std::size_t j = i + 1; j < training_.size(); ++j) {
        const double d = distance_(training_[i], training_[j]);
        neighbor_distance_[i] = std::min(neighbor_distance_[i], d);
        neighbor_distance_[j] = std::min(neighbor_distance_[j], d);
      }
    }
  }

  std::size_t size() const noexcept { return training_.size(); }
  const Item& item(std::size_t i) const { return training_.at(i); }
  double neighbor_distance(std::size_t i) const { return neighbor_distance_.at(i); }

  /// Index of the nearest training item and the distance to it.
  std::pair<std::size_t, double> nearest(const Item& x) const {
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < training_.size(); ++j) {
      const double d = distance_(x, training_[j]);
      if (d < best_distance) {
        best_distance = d;
        best = j;
      }
    }
    return {best, best_distance};
  }

  double score(const Item& x) const {
    const auto [nn, d] = nearest(x);
    return d / std::max(kDenominatorFloor, neighbor_distance_[nn]);
  }

 private:
  std::vector<Item> training_;
  Distance distance_;
  std::vector<double> neighbor_distance_;
};

}  // namespace ood::baselines
