// SPDX-License-Identifier: Apache-2.0
#include "ood/corpus/synthetic.hpp"

#include <stdexcept>

#include "ood/math/rng.hpp"

namespace ood::corpus {

std::string id_domain_name(std::size_t domain) { return "domain" + std::to_string(domain); }
std::string ood_domain_name(std::size_t domain) { return "ood" + std::to_string(domain); }

std::vector<std::string> keyword_pool(std::size_t domain, std::size_t size, bool ood) {
  std::vector<std::string> pool;
  pool.reserve(size);
  const std::string prefix = (ood ? "ood" : "id") + std::to_string(domain) + "_kw";
  for (std::size_t i = 0; i < size; ++i) pool.push_back(prefix + std::to_string(i));
  return pool;
}

std::vector<std::string> function_word_pool(std::size_t size) {
  std::vector<std::string> pool;
  pool.reserve(size);
  for (std::size_t i = 0; i < size; ++i) pool.push_back("fn" + std::to_string(i));
  return pool;
}

void SyntheticSpec::validate() const {
  if (num_domains < 1) throw std::invalid_argument("synthetic spec: num_domains must be >= 1");
  if (keywords_per_domain < 1)
    throw std::invalid_argument("synthetic spec: keywords_per_domain must be >= 1");
  if (function_words < 1)
    throw std::invalid_argument("synthetic spec: function_words must be >= 1");
  if (min_length < 1 || min_length > max_length)
    throw std::invalid_argument("synthetic spec: need 1 <= min_length <= max_length");
  if (max_length > kMaxSentenceLength)
    throw std::invalid_argument("synthetic spec: max_length exceeds sentence cap");
  if (sentences_per_domain < 5)
    throw std::invalid_argument("synthetic spec: sentences_per_domain must be >= 5");
  if (!(keyword_ratio > 0.0 && keyword_ratio <= 1.0))
    throw std::invalid_argument("synthetic spec: keyword_ratio must be in (0, 1]");
}

SyntheticSpec SyntheticSpec::long_sentences() {
  SyntheticSpec spec;
  spec.min_length = 20;
  spec.max_length = 40;
  spec.keyword_ratio = 0.3;
  spec.sentences_per_domain = 100;
  spec.ood_sentences_per_domain = 100;
  spec.background_sentences_per_domain = 200;
  return spec;
}

SyntheticSpec SyntheticSpec::from_config(const util::KeyValueConfig& config) {
  return from_config(config, SyntheticSpec{});
}

SyntheticSpec SyntheticSpec::from_config(const util::KeyValueConfig& config,
                                         const SyntheticSpec& base) {
  config.reject_unknown({"num_domains", "ood_domains", "keywords_per_domain",
                         "function_words", "min_length", "max_length",
                         "sentences_per_domain", "ood_sentences_per_domain",
                         "background_sentences_per_domain", "keyword_ratio", "seed"});
  SyntheticSpec spec = base;
  auto count = [&](std::string_view key, std::size_t fallback) {
    const auto v = config.get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw util::ConfigError("negative value for '" + std::string(key) + "'");
    return static_cast<std::size_t>(v);
  };
  spec.num_domains = count("num_domains", spec.num_domains);
  spec.ood_domains = count("ood_domains", spec.ood_domains);
  spec.keywords_per_domain = count("keywords_per_domain", spec.keywords_per_domain);
  spec.function_words = count("function_words", spec.function_words);
  spec.min_length = count("min_length", spec.min_length);
  spec.max_length = count("max_length", spec.max_length);
  spec.sentences_per_domain = count("sentences_per_domain", spec.sentences_per_domain);
  spec.ood_sentences_per_domain =
      count("ood_sentences_per_domain", spec.ood_sentences_per_domain);
  spec.background_sentences_per_domain =
      count("background_sentences_per_domain", spec.background_sentences_per_domain);
  spec.keyword_ratio = config.get_double("keyword_ratio", spec.keyword_ratio);
  spec.seed = config.get_u64("seed", spec.seed);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw util::ConfigError(e.what());
  }
  return spec;
}

util::KeyValueConfig SyntheticSpec::to_config() const {
  util::KeyValueConfig c;
  c.set("num_domains", std::to_string(num_domains));
  c.set("ood_domains", std::to_string(ood_domains));
  c.set("keywords_per_domain", std::to_string(keywords_per_domain));
  c.set("function_words", std::to_string(function_words));
  c.set("min_length", std::to_string(min_length));
  c.set("max_length", std::to_string(max_length));
  c.set("sentences_per_domain", std::to_string(sentences_per_domain));
  c.set("ood_sentences_per_domain", std::to_string(ood_sentences_per_domain));
  c.set("background_sentences_per_domain", std::to_string(background_sentences_per_domain));
  c.set("keyword_ratio", std::to_string(keyword_ratio));
  c.set("seed", std::to_string(seed));
  return c;
}

namespace {

Tokens generate_sentence(const std::vector<std::string>& keywords,
                         const std::vector<std::string>& functions,
                         const SyntheticSpec& spec, math::Rng& rng) {
  const std::size_t span = spec.max_length - spec.min_length + 1;
  const std::size_t length = spec.min_length + static_cast<std::size_t>(rng.below(span));
  Tokens tokens;
  tokens.reserve(length);
  bool has_keyword = false;
  for (std::size_t i = 0; i < length; ++i) {
    if (rng.bernoulli(spec.keyword_ratio)) {
      tokens.push_back(keywords[rng.below(keywords.size())]);
      has_keyword = true;
    } else {
      tokens.push_back(functions[rng.below(functions.size())]);
    }
  }
  if (!has_keyword) tokens[rng.below(length)] = keywords[rng.below(keywords.size())];
  return tokens;
}

}  // namespace

SyntheticBenchmark synthesize_benchmark(const SyntheticSpec& spec) {
  spec.validate();
  const auto functions = function_word_pool(spec.function_words);
  std::vector<std::vector<std::string>> id_pools;
  std::vector<std::vector<std::string>> ood_pools;
  for (std::size_t d = 0; d < spec.num_domains; ++d)
    id_pools.push_back(keyword_pool(d, spec.keywords_per_domain, false));
  for (std::size_t d = 0; d < spec.ood_domains; ++d)
    ood_pools.push_back(keyword_pool(d, spec.keywords_per_domain, true));

  // Separate streams so changing one product's size leaves the others intact.
  const math::Rng root(spec.seed);
  math::Rng id_rng = root.fork(1);
  math::Rng ood_rng = root.fork(2);
  math::Rng background_rng = root.fork(3);

  SyntheticBenchmark out;
  for (std::size_t d = 0; d < spec.num_domains; ++d)
    for (std::size_t i = 0; i < spec.sentences_per_domain; ++i)
      out.id.push_back({generate_sentence(id_pools[d], functions, spec, id_rng),
                        id_domain_name(d), Origin::in_domain});
  for (std::size_t d = 0; d < spec.ood_domains; ++d)
    for (std::size_t i = 0; i < spec.ood_sentences_per_domain; ++i)
      out.ood.push_back({generate_sentence(ood_pools[d], functions, spec, ood_rng),
                         ood_domain_name(d), Origin::out_of_domain});

  std::vector<const std::vector<std::string>*> all_pools;
  for (const auto& p : id_pools) all_pools.push_back(&p);
  for (const auto& p : ood_pools) all_pools.push_back(&p);
  for (std::size_t i = 0; i < spec.background_sentences_per_domain; ++i)
    for (const auto* pool : all_pools)
      out.background.push_back({generate_sentence(*pool, functions, spec, background_rng),
                                std::nullopt, Origin::in_domain});
  return out;
}

}  // namespace ood::corpus
