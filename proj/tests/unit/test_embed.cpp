// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "ood/embed/classifier.hpp"
#include "ood/embed/embedding.hpp"
#include "ood/embed/recurrent.hpp"
#include "ood/math/grad_check.hpp"

using namespace ood;
using namespace ood::embed;

namespace {

constexpr double kGradTolerance = 1e-4;

double norm(std::span<const double> v) { return std::sqrt(math::squared_norm(v)); }

std::vector<math::VectorD> random_inputs(std::size_t n, std::size_t width, std::uint64_t seed) {
  math::Rng rng(seed);
  std::vector<math::VectorD> out(n, math::VectorD(width));
  for (auto& v : out)
    for (auto& x : v) x = rng.uniform(-1, 1);
  return out;
}

// Scalar objective sum_k a_k h_k(n) over a recurrence, and its gradients.
struct CellObjective {
  const RecurrentCell& cell;
  std::vector<math::VectorD> inputs;
  math::VectorD weights;

  double operator()() const {
    const auto trace = cell.run(inputs);
    return std::inner_product(weights.begin(), weights.end(), trace.hidden.back().begin(), 0.0);
  }
};

}  // namespace

TEST_CASE("lstm step closed forms") {
  RecurrentCell cell(CellKind::lstm, 3, 2);
  cell.weights().set_zero();
  std::fill(cell.bias().begin(), cell.bias().end(), 0.0f);
  const std::vector<double> v{0.4, -0.9}, h(3, 0.0), c(3, 0.0);
  const auto s = lstm_step(v, h, c, cell);
  for (double x : s.cell) CHECK(x == 0.0);
  for (double x : s.hidden) CHECK(x == 0.0);

  // A saturated forget gate carries the memory through.
  for (std::size_t k = 0; k < 3; ++k) cell.bias()[3 + k] = 10.0f;
  const std::vector<double> u{0.3, -0.7, 0.9};
  const auto carried = lstm_step(v, h, u, cell);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(carried.cell[k] - u[k]) < 1e-3);

  const std::vector<double> wrong(5);
  CHECK_THROWS_AS(lstm_step(wrong, h, c, cell), std::invalid_argument);
  RecurrentCell rnn(CellKind::rnn, 3, 2);
  CHECK_THROWS_AS(lstm_step(v, h, c, rnn), std::invalid_argument);
}

TEST_CASE("rnn step with zero weights is zero") {
  RecurrentCell cell(CellKind::rnn, 4, 3);
  cell.weights().set_zero();
  std::fill(cell.bias().begin(), cell.bias().end(), 0.0f);
  const std::vector<double> v{1, 2, 3}, h{0.5, -0.5, 0.1, 0.2};
  for (double x : rnn_step(v, h, cell)) CHECK(x == 0.0);
  CHECK_THROWS_AS(rnn_step(h, h, cell), std::invalid_argument);
}

TEST_CASE("initialisation uses forget bias one") {
  RecurrentCell cell(CellKind::lstm, 5, 3);
  math::Rng rng(1);
  cell.initialize(rng);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(cell.bias()[k] == 0.0f);
    CHECK(cell.bias()[5 + k] == 1.0f);
    CHECK(cell.bias()[10 + k] == 0.0f);
    CHECK(cell.bias()[15 + k] == 0.0f);
  }
}

TEST_CASE("cell BPTT gradients match finite differences") {
  for (auto kind : {CellKind::lstm, CellKind::rnn}) {
    CAPTURE(to_string(kind));
    RecurrentCell cell(kind, 4, 3);
    math::Rng rng(7);
    cell.initialize(rng);
    for (auto& b : cell.bias()) b += static_cast<float>(rng.uniform(-0.3, 0.3));
    CellObjective objective{cell, random_inputs(5, 3, 8), math::VectorD{0.5, -1.0, 0.7, 0.2}};

    auto grads = cell.make_gradients();
    std::vector<math::VectorD> input_grads;
    cell.backprop(cell.run(objective.inputs), objective.inputs, objective.weights, grads,
                  &input_grads);

    auto& params = const_cast<RecurrentCell&>(cell);
    math::Rng pick(3);
    auto loss = [&] { return objective(); };
    CHECK(math::grad_check(loss, params.weights().values(), grads.weights.values(), 1e-3, 100, pick)
              .max_relative_error < kGradTolerance);
    CHECK(math::grad_check(loss, std::span<float>(params.bias()), grads.bias, 1e-3, 100, pick)
              .max_relative_error < kGradTolerance);
    for (std::size_t t = 0; t < objective.inputs.size(); ++t)
      CHECK(math::grad_check(loss, std::span<double>(objective.inputs[t]), input_grads[t], 1e-5,
                             10, pick)
                .max_relative_error < kGradTolerance);
  }
}

TEST_CASE("classifier gradients match finite differences for every layer") {
  const std::vector<std::size_t> sentence{3, 1, 4, 1, 5};
  for (auto cell : {CellKind::lstm, CellKind::rnn})
    for (auto mode : {EmbeddingMode::two_channel, EmbeddingMode::non_static,
                      EmbeddingMode::static_only, EmbeddingMode::random}) {
      CAPTURE(to_string(cell));
      CAPTURE(to_string(mode));
      auto model = testing::small_classifier(cell, mode, 3, 3, 21);
      auto grads = model.make_gradients();
      model.accumulate_gradients(sentence, 2, grads, false, nullptr);
      auto loss = [&] { return model.loss(sentence, 2); };
      math::Rng pick(5);
      auto check = [&](std::span<float> p, std::span<const double> g) {
        CHECK(math::grad_check(loss, p, g, 1e-3, 60, pick).max_relative_error < kGradTolerance);
      };
      check(model.forward_cell().weights().values(), grads.forward.weights.values());
      check(model.forward_cell().bias(), grads.forward.bias);
      check(model.backward_cell().weights().values(), grads.backward.weights.values());
      check(model.backward_cell().bias(), grads.backward.bias);
      check(model.output_weights().values(), grads.output_weights.values());
      check(model.output_bias(), grads.output_bias);
      if (model.embedding().has_tuned()) {
        check(model.embedding().tuned_channel().storage().values(),
              grads.tuned_embedding.values());
        // Words absent from the sentence receive no gradient.
        for (std::size_t w : {0u, 2u, 6u, 7u, 8u})
          for (double g : grads.tuned_embedding.row(w)) CHECK(g == 0.0);
      } else {
        CHECK(grads.tuned_embedding.empty());
      }
    }
}

TEST_CASE("lookup shares the initial vectors and scales dropout survivors") {
  const auto pretrained = testing::random_embedding(4, 6, 1);
  math::Rng rng(2);
  TwoChannelEmbedding two(EmbeddingMode::two_channel, pretrained, rng);
  CHECK(two.width() == 8);
  const auto raw = lookup_two_channel(corpus::Vocabulary::kUnk, two, false, 0.5, nullptr);
  for (std::size_t d = 0; d < 4; ++d) CHECK(raw[d] == raw[4 + d]);

  math::Rng drop(3);
  math::VectorD scale;
  const auto dropped = lookup_two_channel(2, two, true, 0.5, &drop, &scale);
  const auto clean = two.lookup(2);
  for (std::size_t d = 0; d < 8; ++d) {
    CHECK((scale[d] == 0.0 || scale[d] == 2.0));
    CHECK(dropped[d] == clean[d] * scale[d]);
  }
  // Rate zero leaves the lookup untouched.
  const auto unit = lookup_two_channel(2, two, true, 0.0, &drop, nullptr);
  CHECK(unit == clean);
  CHECK_THROWS_AS(two.lookup(6), std::out_of_range);

  TwoChannelEmbedding st(EmbeddingMode::static_only, pretrained, rng);
  CHECK_FALSE(st.has_tuned());
  CHECK(st.width() == 4);
  TwoChannelEmbedding rnd(EmbeddingMode::random, pretrained, rng);
  CHECK_FALSE(rnd.has_static());
  for (float x : rnd.tuned_channel().storage().values()) CHECK(std::abs(x) <= 0.25f);
}

TEST_CASE("dropout expectation per coordinate within two percent") {
  // Coordinate-wise mean over 10^4 masks of several inputs; with rate 0.5 the
  // standard error is |x| / 100, so a 2% bound holds with margin at 4 sigma.
  math::Rng rng(99);
  const math::VectorD input(64, 1.0);
  math::VectorD total(input.size(), 0.0);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    auto v = input;
    apply_dropout(v, 0.5, rng);
    for (std::size_t k = 0; k < v.size(); ++k) total[k] += v[k];
  }
  for (double t : total) CHECK(std::abs(t / draws - 1.0) < 0.02);
}

TEST_CASE("forward pass properties") {
  auto model = testing::small_classifier(CellKind::lstm, EmbeddingMode::two_channel, 5, 4, 3);
  const std::vector<std::size_t> s{1, 2, 3, 8};
  const auto out = forward_classify(s, model, false, nullptr);
  CHECK(std::abs(std::accumulate(out.probabilities.begin(), out.probabilities.end(), 0.0) - 1.0) <
        1e-6);
  CHECK(out.representation.values.size() == 10);
  for (double x : out.representation.values) {
    CHECK(x > -1.0);
    CHECK(x < 1.0);
  }
  CHECK(embed_sentence(s, model).values == embed_sentence(s, model).values);
  CHECK_THROWS_AS(embed_sentence({}, model), std::invalid_argument);
  CHECK_THROWS_AS(embed_sentence(std::vector<std::size_t>{9}, model), std::out_of_range);
  math::Rng rng(1);
  const auto train = forward_classify(s, model, true, &rng);
  CHECK(train.representation.values.size() == out.representation.values.size());
  CHECK_THROWS(forward_classify(s, model, true, nullptr));
}

TEST_CASE("single token sentence runs one step in each direction") {
  auto model = testing::small_classifier(CellKind::lstm, EmbeddingMode::non_static, 4, 2, 5);
  const std::vector<std::size_t> one{7};
  const auto rep = embed_sentence(one, model).values;
  const auto v = model.embedding().lookup(7);
  const std::vector<double> zero(4, 0.0);
  const auto f = lstm_step(v, zero, zero, model.forward_cell());
  const auto b = lstm_step(v, zero, zero, model.backward_cell());
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(rep[k] == f.hidden[k]);
    CHECK(rep[4 + k] == b.hidden[k]);
  }
}

TEST_CASE("reversing a sentence swaps the halves when directions share parameters") {
  auto base = testing::small_classifier(CellKind::lstm, EmbeddingMode::two_channel, 4, 3, 6);
  BiLstmClassifier rig(base.embedding(), base.forward_cell(), base.forward_cell(),
                       base.output_weights(), base.output_bias(), base.labels(), 0.5);
  const std::vector<std::size_t> s{1, 5, 2, 7, 3};
  std::vector<std::size_t> r(s.rbegin(), s.rend());
  const auto a = embed_sentence(s, rig).values;
  const auto b = embed_sentence(r, rig).values;
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a[k] == b[4 + k]);
    CHECK(a[4 + k] == b[k]);
  }
}

TEST_CASE("random-init cross-entropy starts near ln |D|") {
  const auto spec = testing::small_spec(3);
  const auto bench = corpus::synthesize_benchmark(spec);
  std::vector<corpus::Tokens> tokens;
  for (const auto& s : bench.id) tokens.push_back(s.tokens);
  const auto vocab = corpus::Vocabulary::build(tokens, 1);
  for (std::size_t classes : {2u, 3u, 8u}) {
    const auto pretrained = testing::random_embedding(100, vocab.size(), 2, 0.05);
    math::Rng rng(10 + classes);
    TwoChannelEmbedding emb(EmbeddingMode::two_channel, pretrained, rng);
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < classes; ++c) labels.push_back("d" + std::to_string(c));
    BiLstmClassifier model(std::move(emb), CellKind::lstm, 100, labels, 0.5, rng);
    double total = 0.0;
    for (std::size_t i = 0; i < bench.id.size(); ++i)
      total += model.loss(vocab.encode(bench.id[i].tokens), i % classes);
    const double mean = total / double(bench.id.size());
    CHECK(std::abs(mean - std::log(double(classes))) < 0.05 * std::log(double(classes)));
  }
}

TEST_CASE("training on the small benchmark") {
  const auto spec = testing::small_spec(4);
  const auto bench = corpus::synthesize_benchmark(spec);
  const auto split = corpus::split_train_test(bench.id, 4);
  std::vector<corpus::Tokens> tokens;
  for (const auto& s : split.train) tokens.push_back(s.tokens);
  const auto vocab = corpus::Vocabulary::build(tokens, 1);
  const auto pretrained = testing::random_embedding(16, vocab.size(), 3, 0.1);

  ClassifierConfig config;
  config.hidden = 16;
  config.max_epochs = 15;
  config.min_epochs = 15;
  config.seed = 4;
  TrainingReport report;
  const auto model = train_classifier(split.train, split.test_id, vocab, pretrained, config, &report);
  CHECK(report.epochs.size() == 15);
  CHECK(report.epochs.back().train_loss < report.epochs.front().train_loss);
  // 24 held-out sentences from three domains; chance is 1/3.
  CHECK(domain_accuracy(model, vocab, split.test_id) >= 0.8);

  // Frozen static channel, trained channel on seen words.
  CHECK(model.embedding().static_channel() == pretrained);
  const auto seen = vocab.encode(split.train.front().tokens).front();
  const auto before = pretrained.column(seen);
  const auto after = model.embedding().tuned_channel().column(seen);
  CHECK_FALSE(std::equal(before.begin(), before.end(), after.begin()));

  // Determinism.
  const auto again = train_classifier(split.train, split.test_id, vocab, pretrained, config);
  CHECK(again.output_weights() == model.output_weights());
  CHECK(again.embedding().tuned_channel() == model.embedding().tuned_channel());

  config.mode = EmbeddingMode::static_only;
  const auto frozen = train_classifier(split.train, split.test_id, vocab, pretrained, config);
  CHECK_FALSE(frozen.embedding().has_tuned());
  CHECK(frozen.embedding().static_channel() == pretrained);
}

TEST_CASE("degenerate single-domain training") {
  auto spec = testing::small_spec(5);
  spec.num_domains = 1;
  const auto bench = corpus::synthesize_benchmark(spec);
  std::vector<corpus::Tokens> tokens;
  for (const auto& s : bench.id) tokens.push_back(s.tokens);
  const auto vocab = corpus::Vocabulary::build(tokens, 1);
  ClassifierConfig config;
  config.hidden = 6;
  config.max_epochs = 2;
  config.min_epochs = 1;
  const auto model =
      train_classifier(bench.id, {}, vocab, testing::random_embedding(8, vocab.size(), 1), config);
  const auto out = model.forward(vocab.encode(bench.id[0].tokens), false, nullptr);
  REQUIRE(out.probabilities.size() == 1);
  CHECK(out.probabilities[0] == 1.0);
}

TEST_CASE("training rejects unlabeled sentences") {
  std::vector<corpus::LabeledSentence> data{{{"a", "b"}, "x", corpus::Origin::in_domain},
                                            {{"b"}, std::nullopt, corpus::Origin::in_domain}};
  const auto vocab = corpus::Vocabulary::build(std::vector<corpus::Tokens>{{"a", "b"}}, 1);
  CHECK_THROWS_AS(train_classifier(data, {}, vocab, testing::random_embedding(4, vocab.size(), 1),
                                   ClassifierConfig{}),
                  std::invalid_argument);
}

TEST_CASE("gradients vanish faster through the plain recurrent cell") {
  // Gradient of the final state with respect to the first and last inputs of
  // a 40-step sequence, for freshly initialised cells.
  const auto inputs = random_inputs(40, 20, 12);
  auto ratio = [&](CellKind kind) {
    RecurrentCell cell(kind, 30, 20);
    math::Rng rng(13);
    cell.initialize(rng);
    auto grads = cell.make_gradients();
    std::vector<math::VectorD> input_grads;
    const math::VectorD seed(30, 1.0);
    cell.backprop(cell.run(inputs), inputs, seed, grads, &input_grads);
    return norm(input_grads.front()) / norm(input_grads.back());
  };
  const double lstm = ratio(CellKind::lstm);
  const double rnn = ratio(CellKind::rnn);
  MESSAGE("first/last input gradient ratio: lstm " << lstm << ", rnn " << rnn);
  CHECK(rnn < 1e-2 * lstm);
}
