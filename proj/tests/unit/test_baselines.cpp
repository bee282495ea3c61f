// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ood/baselines/features.hpp"
#include "ood/baselines/jaccard.hpp"
#include "ood/baselines/linear_ovr.hpp"
#include "ood/baselines/nearest_neighbor.hpp"
#include "ood/math/rng.hpp"

using namespace ood;
using namespace ood::baselines;

namespace {

corpus::Tokens random_sentence(math::Rng& rng, std::size_t alphabet, std::size_t max_len) {
  corpus::Tokens out(1 + rng.below(max_len));
  for (auto& t : out) t = "w" + std::to_string(rng.below(alphabet));
  return out;
}

double dense_at(const SparseVector& v, std::size_t column) {
  for (const auto& [c, w] : v.entries())
    if (c == column) return w;
  return 0.0;
}

}  // namespace

TEST_CASE("sparse vector normal form") {
  const auto v = SparseVector::from_entries({{3, 1.0}, {1, 2.0}, {3, -1.0}, {0, 0.0}, {1, 0.5}});
  REQUIRE(v.nonzeros() == 1);
  CHECK(v.entries()[0] == SparseVector::Entry{1, 2.5});
  CHECK(v.to_dense(3) == math::VectorD{0.0, 2.5, 0.0});
  CHECK(SparseVector::from_dense(std::vector<double>{0, 1, 0, -2}).squared_norm() == 5.0);
}

TEST_CASE("n-gram extraction") {
  const corpus::Tokens s{"a", "b", "c"};
  CHECK(sentence_ngrams(s, 1) == std::vector<std::string>{"a", "b", "c"});
  CHECK(sentence_ngrams(s, 2) == std::vector<std::string>{"a", "b", "c", "a b", "b c"});
  CHECK(sentence_ngrams(s, 3).size() == 6);
  CHECK(sentence_ngrams(s, 3).back() == "a b c");
}

TEST_CASE("bag-of-words counts") {
  const std::vector<corpus::Tokens> docs{{"a", "a", "b"}, {"b", "c"}};
  const auto index = NgramIndex::build(docs, 1);
  const auto v = bow_vector(docs[0], index);
  CHECK(dense_at(v, *index.column("a")) == 2.0);
  CHECK(dense_at(v, *index.column("b")) == 1.0);
  CHECK(v.nonzeros() == 2);
  CHECK(bow_vector(corpus::Tokens{"zzz"}, index).empty());
  CHECK_THROWS_AS(NgramIndex::build(docs, 4), std::invalid_argument);

  const auto bigrams = NgramIndex::build(std::vector<corpus::Tokens>{{"a", "b", "c"}}, 2);
  CHECK(bigrams.size() == 5);
  CHECK(bigrams.column("a b").has_value());
  CHECK_FALSE(bigrams.column("a c").has_value());
}

TEST_CASE("feature cap keeps the most frequent n-grams") {
  const std::vector<corpus::Tokens> docs{{"a", "b"}, {"a", "c"}, {"a", "b", "d"}};
  const auto index = NgramIndex::build(docs, 1, 2);
  CHECK(index.ngrams() == std::vector<std::string>{"a", "b"});
  CHECK(index.document_frequency(0) == 3);
}

TEST_CASE("tf-idf weights") {
  const std::vector<corpus::Tokens> docs{{"the", "cat"}, {"the", "dog", "dog"}, {"the", "cat"}};
  const auto index = NgramIndex::build(docs, 1);
  const auto v = tfidf_vector(docs[1], index);
  // "the" occurs in every document and vanishes.
  CHECK(dense_at(v, index.column("the").value()) == 0.0);
  CHECK(dense_at(v, *index.column("dog")) == doctest::Approx(2.0 * std::log(3.0)));
  CHECK(v.nonzeros() == 1);
}

TEST_CASE("tf-idf agrees with direct counting") {
  math::Rng rng(1);
  std::vector<corpus::Tokens> docs;
  for (int i = 0; i < 30; ++i) docs.push_back(random_sentence(rng, 12, 8));
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto index = NgramIndex::build(docs, n);
    std::vector<std::vector<std::string>> gram_docs;
    for (const auto& d : docs) gram_docs.push_back(sentence_ngrams(d, n));
    for (int i = 0; i < 10; ++i) {
      const auto s = random_sentence(rng, 14, 8);
      const auto expected = oracle::tfidf(sentence_ngrams(s, n), gram_docs);
      const auto v = tfidf_vector(s, index);
      CHECK(v.nonzeros() == expected.size());
      for (const auto& [g, w] : expected) CHECK(dense_at(v, *index.column(g)) == doctest::Approx(w));
    }
  }
}

TEST_CASE("permuting a sentence leaves unigram features unchanged") {
  const std::vector<corpus::Tokens> docs{{"a", "b", "c"}, {"c", "a"}, {"b", "d"}};
  const auto uni = NgramIndex::build(docs, 1);
  const auto bi = NgramIndex::build(docs, 2);
  const corpus::Tokens s{"a", "b", "c"}, p{"c", "a", "b"};
  CHECK(bow_vector(s, uni) == bow_vector(p, uni));
  CHECK(tfidf_vector(s, uni) == tfidf_vector(p, uni));
  CHECK_FALSE(bow_vector(s, bi) == bow_vector(p, bi));
}

TEST_CASE("neural bag of words") {
  math::EmbeddingMatrix e(2, 3);
  e.column(0)[0] = 1.0f;
  e.column(1)[0] = 3.0f;
  e.column(2)[1] = 4.0f;
  const auto v = neural_bow(std::vector<std::size_t>{1, 2}, e);
  CHECK(v == math::VectorD{1.5, 2.0});
  CHECK_THROWS_AS(neural_bow({}, e), std::invalid_argument);
}

TEST_CASE("jaccard distance") {
  const corpus::Tokens ab{"a", "b"}, ba{"b", "a", "a"}, cd{"c", "d"}, abc{"a", "b", "c"},
      bcd{"b", "c", "d"};
  CHECK(jaccard_distance(ab, ba) == 0.0);
  CHECK(jaccard_distance(ab, cd) == 1.0);
  CHECK(jaccard_distance(abc, bcd) == doctest::Approx(0.5));
  CHECK_THROWS_AS(jaccard_distance(ab, {}), std::invalid_argument);

  math::Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto x = random_sentence(rng, 8, 6), y = random_sentence(rng, 8, 6),
               z = random_sentence(rng, 8, 6);
    const double xy = jaccard_distance(x, y);
    CHECK(xy == doctest::Approx(oracle::set_jaccard(x, y)));
    CHECK(xy == jaccard_distance(y, x));
    CHECK(xy <= jaccard_distance(x, z) + jaccard_distance(z, y) + 1e-12);
  }
}

TEST_CASE("weighted jaccard") {
  const auto a = SparseVector::from_dense(std::vector<double>{1, 0, 2});
  const auto b = SparseVector::from_dense(std::vector<double>{0, 1, 2});
  CHECK(weighted_jaccard_distance(a, b) == doctest::Approx(1.0 - 2.0 / 4.0));
  CHECK(weighted_jaccard_distance(a, a) == 0.0);
  CHECK(weighted_jaccard_distance(SparseVector{}, SparseVector{}) == 0.0);
  CHECK_THROWS_AS(weighted_jaccard_distance(SparseVector::from_dense(std::vector<double>{-1}), a),
                  std::invalid_argument);

  // Binary vectors reduce to the set distance.
  const std::vector<corpus::Tokens> docs{{"a", "b", "c", "d"}};
  const auto index = NgramIndex::build(docs, 1);
  const corpus::Tokens x{"a", "b", "b"}, y{"b", "c"};
  CHECK(weighted_jaccard_distance(token_set_vector(x, index), token_set_vector(y, index)) ==
        doctest::Approx(jaccard_distance(x, y)));

  const auto split = split_signs(std::vector<double>{0.5, -0.25, 0.0});
  CHECK(split.to_dense(6) == math::VectorD{0.5, 0.0, 0.0, 0.25, 0.0, 0.0});

  math::Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> u(5), v(5);
    for (auto& t : u) t = rng.uniform(-1, 1);
    for (auto& t : v) t = rng.uniform(-1, 1);
    const auto su = split_signs(u), sv = split_signs(v);
    CHECK(weighted_jaccard_distance(su, sv) ==
          doctest::Approx(oracle::weighted_jaccard(su.to_dense(10), sv.to_dense(10))));
  }
}

TEST_CASE("nearest-neighbour ratio") {
  using Scorer = NearestNeighborScorer<corpus::Tokens, double (*)(std::span<const std::string>,
                                                                  std::span<const std::string>)>;
  const std::vector<corpus::Tokens> train{{"a", "b"}, {"a", "b", "c"}, {"x", "y"}};
  const Scorer scorer(train, &jaccard_distance);
  CHECK(scorer.score(train[0]) == 0.0);
  // Disjoint from everything: distance 1 to item 0, whose neighbour is at 1/3.
  CHECK(scorer.score(corpus::Tokens{"q"}) == doctest::Approx(3.0));
  CHECK(scorer.nearest(corpus::Tokens{"q"}).first == 0);
  CHECK_THROWS_AS(Scorer(std::vector<corpus::Tokens>{{"a"}}, &jaccard_distance),
                  std::invalid_argument);

  // Duplicate training items hit the denominator floor.
  const Scorer dup(std::vector<corpus::Tokens>{{"a"}, {"a"}}, &jaccard_distance);
  CHECK(dup.score(corpus::Tokens{"a", "b"}) == doctest::Approx(0.5 / 1e-9));

  math::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<corpus::Tokens> items;
    for (int i = 0; i < 15; ++i) items.push_back(random_sentence(rng, 10, 5));
    const Scorer s(items, &jaccard_distance);
    for (int q = 0; q < 5; ++q) {
      const auto x = random_sentence(rng, 12, 5);
      CHECK(s.score(x) == doctest::Approx(oracle::nn_ratio(items, x, &jaccard_distance)));
    }
  }
}

TEST_CASE("one-vs-rest linear classifier") {
  // Domain d uses columns 2d and 2d+1; column 8 appears only in held-out
  // OOD inputs, so its margin is the (negative) one-vs-rest bias.
  math::Rng rng(5);
  const std::vector<std::string> names{"a", "b", "c", "d"};
  std::vector<SparseVector> features;
  std::vector<std::string> labels;
  for (int i = 0; i < 80; ++i) {
    const std::size_t d = i % 4;
    features.push_back(SparseVector::from_entries(
        {{2 * d, 1.0 + rng.uniform()}, {2 * d + 1, rng.uniform()}}));
    labels.push_back(names[d]);
  }
  const auto model = train_ovr(features, labels, 9);
  CHECK(model.labels() == names);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i)
    if (model.labels()[model.predict(features[i])] == labels[i]) ++correct;
  CHECK(correct == features.size());

  const auto ood = SparseVector::from_entries({{8, 1.0}});
  for (double m : model.margins(ood)) CHECK(m < 0.0);
  CHECK(cbc_score(model, ood) < cbc_score(model, features[0]));
  const double idv = idv_score(model, ood);
  CHECK(idv > 0.0);
  CHECK(idv < 1.0);
  CHECK(idv == doctest::Approx(1.0 / (1.0 + std::exp(-cbc_score(model, ood)))));

  const auto again = train_ovr(features, labels, 9);
  CHECK(again.weights() == model.weights());

  const std::vector<std::string> one(features.size(), "a");
  CHECK_THROWS_AS(train_ovr(features, one, 9), std::invalid_argument);
  CHECK_THROWS_AS(train_ovr(features, std::span(labels).first(3), 9), std::invalid_argument);
}
