// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ood/baselines/features.hpp"
#include "ood/baselines/jaccard.hpp"
#include "ood/baselines/linear_ovr.hpp"
#include "ood/math/activations.hpp"
#include "ood/math/rng.hpp"

namespace ood::baselines {

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector out;
  for (const auto& [column, weight] : entries) {
    if (!out.entries_.empty() && out.entries_.back().first == column)
      out.entries_.back().second += weight;
    else
      out.entries_.emplace_back(column, weight);
  }
  std::erase_if(out.entries_, [](const Entry& e) { return e.second == 0.0; });
  return out;
}

SparseVector SparseVector::from_dense(std::span<const double> values) {
  SparseVector out;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) out.entries_.emplace_back(i, values[i]);
  return out;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second * e.second;
  return s;
}

math::VectorD SparseVector::to_dense(std::size_t width) const {
  math::VectorD out(width, 0.0);
  for (const auto& [column, weight] : entries_)
    if (column < width) out[column] = weight;
  return out;
}

std::vector<std::string> sentence_ngrams(std::span<const std::string> tokens,
                                         std::size_t n_max) {
  std::vector<std::string> out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      std::string gram = tokens[start];
      for (std::size_t k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[start + k];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

NgramIndex NgramIndex::build(std::span<const corpus::Tokens> sentences, std::size_t n_max,
                             std::size_t max_features) {
  if (n_max < 1 || n_max > 3) throw std::invalid_argument("ngram index: n_max must be 1..3");
  if (sentences.empty()) throw std::invalid_argument("ngram index: no training sentences");
  std::map<std::string, std::size_t> df;
  for (const auto& sentence : sentences) {
    auto grams = sentence_ngrams(sentence, n_max);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[g];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  if (max_features > 0 && ranked.size() > max_features) {
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(max_features);
    std::sort(ranked.begin(), ranked.end());
  }
  std::vector<std::string> grams;
  std::vector<std::size_t> freq;
  for (auto& [g, f] : ranked) {
    grams.push_back(g);
    freq.push_back(f);
  }
  return NgramIndex(n_max, sentences.size(), std::move(grams), std::move(freq));
}

NgramIndex::NgramIndex(std::size_t n_max, std::size_t documents, std::vector<std::string> ngrams,
                       std::vector<std::size_t> document_frequency)
    : n_max_(n_max), documents_(documents), ngrams_(std::move(ngrams)),
      df_(std::move(document_frequency)) {
  if (ngrams_.size() != df_.size())
    throw std::invalid_argument("ngram index: column and frequency counts differ");
  for (std::size_t i = 0; i < ngrams_.size(); ++i) {
    if (df_[i] == 0 || df_[i] > documents_)
      throw std::invalid_argument("ngram index: document frequency out of range");
    if (!columns_.emplace(ngrams_[i], i).second)
      throw std::invalid_argument("ngram index: duplicate n-gram " + ngrams_[i]);
  }
}

std::optional<std::size_t> NgramIndex::column(std::string_view ngram) const {
  const auto it = columns_.find(std::string(ngram));
  if (it == columns_.end()) return std::nullopt;
  return it->second;
}

SparseVector bow_vector(std::span<const std::string> tokens, const NgramIndex& index) {
  std::vector<SparseVector::Entry> entries;
  for (const auto& g : sentence_ngrams(tokens, index.n_max()))
    if (const auto col = index.column(g)) entries.emplace_back(*col, 1.0);
  return SparseVector::from_entries(std::move(entries));
}

SparseVector tfidf_vector(std::span<const std::string> tokens, const NgramIndex& index) {
  const auto counts = bow_vector(tokens, index);
  const double n = static_cast<double>(index.documents());
  std::vector<SparseVector::Entry> entries;
  for (const auto& [col, tf] : counts.entries()) {
    const double idf = std::log(n / static_cast<double>(index.document_frequency(col)));
    entries.emplace_back(col, tf * idf);
  }
  return SparseVector::from_entries(std::move(entries));
}

math::VectorD neural_bow(std::span<const std::size_t> tokens, const math::EmbeddingMatrix& E) {
  if (tokens.empty()) throw std::invalid_argument("neural_bow: empty sentence");
  math::VectorD out(E.dim(), 0.0);
  for (std::size_t w : tokens) {
    const auto col = E.column(w);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += col[i];
  }
  for (auto& x : out) x /= static_cast<double>(tokens.size());
  return out;
}

// ---------------------------------------------------------------------------

double jaccard_distance(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("jaccard_distance: empty token set");
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  const std::size_t together = sa.size() + sb.size() - shared;
  return 1.0 - static_cast<double>(shared) / static_cast<double>(together);
}

double weighted_jaccard_distance(const SparseVector& a, const SparseVector& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  double lo = 0.0;
  double hi = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  auto check = [](double w) {
    if (w < 0.0) throw std::invalid_argument("weighted_jaccard_distance: negative weight");
    return w;
  };
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      hi += check(x[i++].second);
    } else if (i == x.size() || y[j].first < x[i].first) {
      hi += check(y[j++].second);
    } else {
      const double u = check(x[i++].second);
      const double v = check(y[j++].second);
      lo += std::min(u, v);
      hi += std::max(u, v);
    }
  }
  if (hi == 0.0) return 0.0;
  return 1.0 - lo / hi;
}

SparseVector split_signs(std::span<const double> values) {
  std::vector<SparseVector::Entry> entries;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0) entries.emplace_back(2 * i, values[i]);
    else if (values[i] < 0.0) entries.emplace_back(2 * i + 1, -values[i]);
  }
  return SparseVector::from_entries(std::move(entries));
}

SparseVector token_set_vector(std::span<const std::string> tokens, const NgramIndex& index) {
  const auto counts = bow_vector(tokens, index);
  std::vector<SparseVector::Entry> entries;
  for (const auto& entry : counts.entries()) entries.emplace_back(entry.first, 1.0);
  return SparseVector::from_entries(std::move(entries));
}

// ---------------------------------------------------------------------------

namespace {

struct Normalized {
  std::vector<SparseVector::Entry> entries;
};

Normalized unit_scaled(const SparseVector& x, std::size_t dimension) {
  Normalized out;
  double norm = 0.0;
  for (const auto& [col, w] : x.entries())
    if (col < dimension) {
      out.entries.emplace_back(col, w);
      norm += w * w;
    }
  if (norm > 0.0) {
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& e : out.entries) e.second *= inv;
  }
  return out;
}

}  // namespace

LinearOvrClassifier::LinearOvrClassifier(std::vector<std::string> labels,
                                         math::MatrixD weights, math::VectorD bias)
    : labels_(std::move(labels)), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (labels_.size() < 2) throw std::invalid_argument("ovr: at least two domains are required");
  if (weights_.rows() != labels_.size() || bias_.size() != labels_.size())
    throw std::invalid_argument("ovr: parameter shapes do not match the label count");
}

math::VectorD LinearOvrClassifier::margins(const SparseVector& x) const {
  const auto scaled = unit_scaled(x, dimension());
  math::VectorD out(bias_);
  for (std::size_t d = 0; d < num_domains(); ++d) {
    const auto w = weights_.row(d);
    for (const auto& [col, v] : scaled.entries) out[d] += w[col] * v;
  }
  return out;
}

std::size_t LinearOvrClassifier::predict(const SparseVector& x) const {
  const auto m = margins(x);
  return static_cast<std::size_t>(std::max_element(m.begin(), m.end()) - m.begin());
}

LinearOvrClassifier train_ovr(std::span<const SparseVector> features,
                              std::span<const std::string> labels, std::size_t dimension,
                              const OvrConfig& config) {
  if (features.size() != labels.size())
    throw std::invalid_argument("train_ovr: feature and label counts differ");
  std::vector<std::string> names(labels.begin(), labels.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  if (names.size() < 2) throw std::invalid_argument("train_ovr: at least two domains are required");

  std::vector<Normalized> inputs;
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < features.size(); ++i) {
    inputs.push_back(unit_scaled(features[i], dimension));
    targets.push_back(static_cast<std::size_t>(
        std::lower_bound(names.begin(), names.end(), labels[i]) - names.begin()));
  }

  const std::size_t D = names.size();
  // w_d is stored as scale[d] * raw(d) so the L2 shrinkage is O(1) per step.
  math::MatrixD raw(D, dimension);
  std::vector<double> scale(D, 1.0);
  math::VectorD bias(D, 0.0);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  math::Rng rng = math::Rng(config.seed).fork(21);
  double t = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t idx : order) {
      const double eta = config.eta0 / (1.0 + config.eta0 * config.lambda * t);
      t += 1.0;
      const auto& x = inputs[idx].entries;
      for (std::size_t d = 0; d < D; ++d) {
        const double y = targets[idx] == d ? 1.0 : -1.0;
        auto w = raw.row(d);
        double margin = bias[d];
        for (const auto& [col, v] : x) margin += scale[d] * w[col] * v;
        scale[d] *= 1.0 - eta * config.lambda;
        if (y * margin < 1.0) {
          for (const auto& [col, v] : x) w[col] += eta * y * v / scale[d];
          bias[d] += eta * y;
        }
        if (scale[d] < 1e-6) {
          for (auto& value : w) value *= scale[d];
          scale[d] = 1.0;
        }
      }
    }
  }
  for (std::size_t d = 0; d < D; ++d)
    for (auto& value : raw.row(d)) value *= scale[d];
  return LinearOvrClassifier(std::move(names), std::move(raw), std::move(bias));
}

double cbc_score(const LinearOvrClassifier& model, const SparseVector& x) {
  const auto m = model.margins(x);
  return *std::max_element(m.begin(), m.end());
}

double idv_score(const LinearOvrClassifier& model, const SparseVector& x) {
  return math::sigmoid(cbc_score(model, x));
}

}  // namespace ood::baselines
