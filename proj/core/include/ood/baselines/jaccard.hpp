// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

#include "ood/baselines/features.hpp"

namespace ood::baselines {

/// 1 - |a ∩ b| / |a ∪ b| over the distinct tokens of each list. Throws
/// std::invalid_argument when either list is empty.
double jaccard_distance(std::span<const std::string> a, std::span<const std::string> b);

/// Weighted Jaccard distance 1 - sum(min) / sum(max) for nonnegative weights.
/// Equals the set distance on binary vectors. Two empty vectors are at
/// distance 0. Throws std::invalid_argument on a negative weight.
double weighted_jaccard_distance(const SparseVector& a, const SparseVector& b);

/// Maps a signed dense vector to a nonnegative sparse one by splitting every
/// coordinate into its positive and negative parts (width doubles), so the
/// weighted Jaccard distance applies to real-valued representations.
SparseVector split_signs(std::span<const double> values);

/// Binary indicator vector of the distinct in-index n-grams.
SparseVector token_set_vector(std::span<const std::string> tokens, const NgramIndex& index);

}  // namespace ood::baselines
