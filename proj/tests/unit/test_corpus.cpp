// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "ood/corpus/corpus.hpp"
#include "ood/corpus/synthetic.hpp"
#include "ood/util/key_value.hpp"

using namespace ood::corpus;

namespace {

std::vector<LabeledSentence> labeled(std::size_t per_domain, std::size_t domains) {
  std::vector<LabeledSentence> out;
  for (std::size_t d = 0; d < domains; ++d)
    for (std::size_t i = 0; i < per_domain; ++i)
      out.push_back({{"w" + std::to_string(d), "s" + std::to_string(i)},
                     "dom" + std::to_string(d), Origin::in_domain});
  return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and strips edge punctuation") {
  CHECK(tokenize("Please record Game of Thrones.") ==
        Tokens{"please", "record", "game", "of", "thrones"});
  CHECK(tokenize("A  A") == Tokens{"a", "a"});
  CHECK(tokenize("Hello,") == Tokens{"hello"});
  CHECK(tokenize("  don't -- stop!  ") == Tokens{"don't", "stop"});
  CHECK_THROWS_AS(tokenize(""), std::invalid_argument);
  CHECK_THROWS_AS(tokenize("   \t "), std::invalid_argument);
  CHECK_THROWS_AS(tokenize("... !!"), std::invalid_argument);
}

TEST_CASE("vocabulary construction and min_count") {
  const std::vector<Tokens> corpus{{"a", "b"}, {"a"}};
  const auto v1 = Vocabulary::build(corpus, 1);
  CHECK(v1.size() == 3);
  CHECK(v1.token(0) == "<unk>");
  CHECK(v1.index("a") == 1);
  CHECK(v1.index("b") == 2);

  const auto v2 = Vocabulary::build(corpus, 2);
  CHECK(v2.size() == 2);
  CHECK(v2.index("b") == Vocabulary::kUnk);
  CHECK(v2.encode(Tokens{"b", "a", "zzz"}) == std::vector<std::size_t>{0, 1, 0});
}

TEST_CASE("vocabulary ties break lexicographically and round-trip") {
  const std::vector<Tokens> corpus{{"pear", "apple", "fig"}, {"fig", "apple", "pear"}};
  const auto a = Vocabulary::build(corpus, 1);
  const auto b = Vocabulary::build(corpus, 1);
  CHECK(a == b);
  CHECK(a.tokens() == std::vector<std::string>{"<unk>", "apple", "fig", "pear"});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.index(a.token(i)) == i);
    const auto encoded = a.encode(std::vector<std::string>{a.token(i)});
    CHECK(encoded.front() < a.size());
  }
  CHECK(Vocabulary(a.tokens()) == a);
  CHECK_THROWS(Vocabulary(std::vector<std::string>{"x"}));
}

TEST_CASE("vocabulary extend appends only new tokens") {
  auto v = Vocabulary::build(std::vector<Tokens>{{"a", "a", "b"}}, 2);
  CHECK(v.size() == 2);
  v.extend(std::vector<Tokens>{{"b", "c", "a"}}, 1);
  CHECK(v.tokens() == std::vector<std::string>{"<unk>", "a", "b", "c"});
}

TEST_CASE("labeled corpus format") {
  std::istringstream good("# comment\ndomain0\tPlay some jazz.\n\ndomain1\tRecord the news\n");
  const auto s = read_labeled(good, "good");
  REQUIRE(s.size() == 2);
  CHECK(*s[0].label == "domain0");
  CHECK(s[0].tokens == Tokens{"play", "some", "jazz"});

  std::istringstream missing_tab("domain0 play jazz\n");
  CHECK_THROWS_AS(read_labeled(missing_tab, "bad"), CorpusFormatError);
  std::istringstream two_tabs("a\tb\tc\n");
  CHECK_THROWS_AS(read_labeled(two_tabs, "bad"), CorpusFormatError);
  std::istringstream empty_label("\tplay\n");
  CHECK_THROWS_AS(read_labeled(empty_label, "bad"), CorpusFormatError);

  std::ostringstream out;
  write_labeled(out, s);
  std::istringstream back(out.str());
  const auto again = read_labeled(back, "roundtrip");
  CHECK(again.size() == 2);
  CHECK(again[1].tokens == s[1].tokens);
}

TEST_CASE("long sentences are truncated at the cap") {
  std::string text;
  for (int i = 0; i < 80; ++i) text += "w" + std::to_string(i) + " ";
  std::istringstream in(text + "\n");
  const auto s = read_unlabeled(in, "long", Origin::out_of_domain);
  REQUIRE(s.size() == 1);
  CHECK(s[0].tokens.size() == kMaxSentenceLength);
  CHECK(s[0].origin == Origin::out_of_domain);
  CHECK_FALSE(s[0].label.has_value());
}

TEST_CASE("train/test split ratios") {
  const auto one = labeled(10, 1);
  const auto split = split_train_test(one, 42);
  CHECK(split.train.size() == 8);
  CHECK(split.test_id.size() == 2);

  // 5755 sentences as 1151 domains of 5 still give 4604 / 1151.
  const auto many = labeled(5, 1151);
  const auto big = split_train_test(many, 1);
  CHECK(big.train.size() == 4604);
  CHECK(big.test_id.size() == 1151);

  const auto again = split_train_test(one, 42);
  for (std::size_t i = 0; i < split.train.size(); ++i)
    CHECK(split.train[i].tokens == again.train[i].tokens);
}

TEST_CASE("split is stratified, disjoint and rejects tiny domains") {
  auto data = labeled(23, 3);
  auto extra = labeled(7, 1);
  for (auto& s : extra) s.label = "small";
  data.insert(data.end(), extra.begin(), extra.end());
  const auto split = split_train_test(data, 5);
  std::map<std::string, int> train_count, test_count;
  std::set<Tokens> train_set;
  for (const auto& s : split.train) {
    ++train_count[*s.label];
    train_set.insert(s.tokens);
  }
  for (const auto& s : split.test_id) {
    ++test_count[*s.label];
    CHECK(train_set.count(s.tokens) == 0);
  }
  for (const auto& [label, n] : train_count) {
    const double total = n + test_count[label];
    CHECK(std::abs(n - 0.8 * total) <= 1.0);
  }

  auto tiny = labeled(4, 1);
  tiny[0].label = tiny[1].label = tiny[2].label = tiny[3].label = std::string("weather");
  try {
    split_train_test(tiny, 1);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("weather") != std::string::npos);
  }

  auto with_ood = labeled(10, 1);
  with_ood[0].origin = Origin::out_of_domain;
  CHECK_THROWS(split_train_test(with_ood, 1));
}

TEST_CASE("synthetic benchmark sizes and disjoint keyword pools") {
  SyntheticSpec spec;
  const auto b = synthesize_benchmark(spec);
  CHECK(b.id.size() == 800);
  CHECK(b.ood.size() == 400);

  std::set<std::string> id_words, ood_words, function_words;
  for (const auto& w : function_word_pool(spec.function_words)) function_words.insert(w);
  for (const auto& s : b.id) {
    CHECK(s.label.has_value());
    CHECK(s.tokens.size() >= spec.min_length);
    CHECK(s.tokens.size() <= spec.max_length);
    for (const auto& t : s.tokens)
      if (!function_words.count(t)) id_words.insert(t);
  }
  for (const auto& s : b.ood) {
    CHECK(s.origin == Origin::out_of_domain);
    for (const auto& t : s.tokens)
      if (!function_words.count(t)) ood_words.insert(t);
  }
  for (const auto& w : id_words) CHECK(ood_words.count(w) == 0);

  // Function words occur on both sides.
  auto uses_function_word = [&](const std::vector<LabeledSentence>& ss) {
    return std::any_of(ss.begin(), ss.end(), [&](const LabeledSentence& s) {
      return std::any_of(s.tokens.begin(), s.tokens.end(),
                         [&](const std::string& t) { return function_words.count(t) > 0; });
    });
  };
  CHECK(uses_function_word(b.id));
  CHECK(uses_function_word(b.ood));
}

TEST_CASE("synthetic benchmark keyword share is near the requested ratio") {
  SyntheticSpec spec;
  const auto b = synthesize_benchmark(spec);
  std::size_t keywords = 0, total = 0;
  for (const auto& s : b.id)
    for (const auto& t : s.tokens) {
      ++total;
      keywords += t.rfind("fn", 0) != 0;
    }
  const double share = double(keywords) / double(total);
  CHECK(share > 0.55);
  CHECK(share < 0.7);
}

TEST_CASE("synthetic benchmark is deterministic and validates its spec") {
  SyntheticSpec spec;
  spec.seed = 9;
  const auto a = synthesize_benchmark(spec);
  const auto b = synthesize_benchmark(spec);
  REQUIRE(a.id.size() == b.id.size());
  for (std::size_t i = 0; i < a.id.size(); ++i) CHECK(a.id[i].tokens == b.id[i].tokens);
  for (std::size_t i = 0; i < a.background.size(); ++i)
    CHECK(a.background[i].tokens == b.background[i].tokens);

  SyntheticSpec one;
  one.num_domains = 1;
  CHECK(synthesize_benchmark(one).id.size() == one.sentences_per_domain);

  SyntheticSpec bad;
  bad.min_length = 10;
  bad.max_length = 5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  ood::util::KeyValueConfig kv;
  kv.set("keyword_ratio", "0");
  CHECK_THROWS_AS(SyntheticSpec::from_config(kv), ood::util::ConfigError);
  const auto echo = SyntheticSpec::from_config(spec.to_config());
  CHECK(echo.seed == 9);
}

TEST_CASE("long-sentence variant") {
  const auto spec = ood::corpus::SyntheticSpec::long_sentences();
  CHECK_NOTHROW(spec.validate());
  const auto bench = ood::corpus::synthesize_benchmark(spec);
  for (const auto& s : bench.id) {
    CHECK(s.tokens.size() >= 20);
    CHECK(s.tokens.size() <= 40);
  }
  std::istringstream in("sentences_per_domain = 12\n");
  const auto merged =
      ood::corpus::SyntheticSpec::from_config(ood::util::KeyValueConfig::parse(in), spec);
  CHECK(merged.sentences_per_domain == 12);
  CHECK(merged.min_length == 20);
  CHECK(merged.keyword_ratio == 0.3);
}
