// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ood/corpus/corpus.hpp"
#include "ood/util/key_value.hpp"

namespace ood::corpus {

/// Parameters of the seeded multi-domain benchmark generator.
///
/// Every ID and OOD domain owns a private keyword pool; all domains share one
/// pool of function words. Each sentence position draws a keyword with
/// probability `keyword_ratio`, otherwise a function word, and every sentence
/// carries at least one keyword. The background corpus is unlabeled text
/// drawn from all pools (ID and OOD) and is meant for word-vector
/// pre-training only.
struct SyntheticSpec {
  std::size_t num_domains = 4;
  std::size_t ood_domains = 2;
  std::size_t keywords_per_domain = 40;
  std::size_t function_words = 30;
  std::size_t min_length = 3;
  std::size_t max_length = 20;
  std::size_t sentences_per_domain = 200;
  std::size_t ood_sentences_per_domain = 200;
  std::size_t background_sentences_per_domain = 400;
  double keyword_ratio = 0.6;
  std::uint64_t seed = 42;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  static SyntheticSpec from_config(const util::KeyValueConfig& config);
  /// Keys of `config` override the matching fields of `base`.
  static SyntheticSpec from_config(const util::KeyValueConfig& config,
                                   const SyntheticSpec& base);

  /// 20-40 token sentences with a sparser keyword signal (ratio 0.3) and
  /// half the default sentence counts, where the benchmark does not
  /// saturate for either cell type.
  static SyntheticSpec long_sentences();
  util::KeyValueConfig to_config() const;
};

struct SyntheticBenchmark {
  std::vector<LabeledSentence> id;          // labeled `domainN`
  std::vector<LabeledSentence> ood;         // origin OOD, label `oodN`
  std::vector<LabeledSentence> background;  // unlabeled pre-training text
};

SyntheticBenchmark synthesize_benchmark(const SyntheticSpec& spec);

std::string id_domain_name(std::size_t domain);
std::string ood_domain_name(std::size_t domain);
/// Keyword pool of an ID domain (ood = false) or OOD domain (ood = true).
std::vector<std::string> keyword_pool(std::size_t domain, std::size_t size, bool ood);
std::vector<std::string> function_word_pool(std::size_t size);

}  // namespace ood::corpus
