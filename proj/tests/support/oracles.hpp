// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deliberately naive reference implementations used to cross-check the
// library's scorers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ood::oracle {

inline double set_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::vector<std::string> both, either;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(either));
  return 1.0 - double(both.size()) / double(either.size());
}

inline double weighted_jaccard(const std::vector<double>& a, const std::vector<double>& b) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lo += std::min(a[i], b[i]);
    hi += std::max(a[i], b[i]);
  }
  return hi == 0.0 ? 0.0 : 1.0 - lo / hi;
}

/// Nearest-neighbour ratio by exhaustive double loop, recomputing every
/// distance on demand.
template <typename Item, typename Distance>
double nn_ratio(const std::vector<Item>& training, const Item& x, Distance distance) {
  std::size_t nn = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < training.size(); ++j) {
    const double d = distance(x, training[j]);
    if (d < best) {
      best = d;
      nn = j;
    }
  }
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < training.size(); ++j)
    if (j != nn) second = std::min(second, distance(training[nn], training[j]));
  return best / std::max(second, 1e-9);
}

/// tf-idf weights by direct counting over the documents.
inline std::map<std::string, double> tfidf(const std::vector<std::string>& grams,
                                           const std::vector<std::vector<std::string>>& docs) {
  std::map<std::string, double> tf;
  for (const auto& g : grams) tf[g] += 1.0;
  std::map<std::string, double> out;
  for (const auto& [g, count] : tf) {
    std::size_t df = 0;
    for (const auto& d : docs)
      if (std::find(d.begin(), d.end(), g) != d.end()) ++df;
    if (df == 0) continue;
    const double w = count * std::log(double(docs.size()) / double(df));
    if (w != 0.0) out[g] = w;
  }
  return out;
}

}  // namespace ood::oracle
