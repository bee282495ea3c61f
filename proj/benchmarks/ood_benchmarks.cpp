// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "ood/corpus/synthetic.hpp"
#include "ood/detect/autoencoder.hpp"
#include "ood/detect/evaluation.hpp"
#include "ood/embed/classifier.hpp"
#include "ood/word2vec/skipgram.hpp"

using namespace ood;

namespace {

math::EmbeddingMatrix random_embedding(std::size_t dim, std::size_t vocab, math::Rng& rng) {
  math::EmbeddingMatrix e(dim, vocab);
  for (auto& x : e.storage().values()) x = static_cast<float>(rng.uniform(-0.5, 0.5));
  return e;
}

embed::BiLstmClassifier make_model(embed::CellKind cell, std::size_t hidden) {
  math::Rng rng(1);
  embed::TwoChannelEmbedding embedding(embed::EmbeddingMode::two_channel,
                                       random_embedding(100, 500, rng), rng);
  return embed::BiLstmClassifier(std::move(embedding), cell, hidden, {"a", "b", "c", "d"}, 0.5,
                                 rng);
}

std::vector<std::size_t> sentence(std::size_t length) {
  std::vector<std::size_t> s(length);
  for (std::size_t i = 0; i < length; ++i) s[i] = 1 + (i * 37) % 499;
  return s;
}

void BM_LstmStep(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  embed::RecurrentCell cell(embed::CellKind::lstm, hidden, 200);
  math::Rng rng(2);
  cell.initialize(rng);
  const std::vector<double> input(200, 0.1), h(hidden, 0.0), c(hidden, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(embed::lstm_step(input, h, c, cell));
}
BENCHMARK(BM_LstmStep)->Arg(100)->Arg(150);

void BM_EmbedSentence(benchmark::State& state) {
  const auto model = make_model(embed::CellKind::lstm, 100);
  const auto s = sentence(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(embed::embed_sentence(s, model));
}
BENCHMARK(BM_EmbedSentence)->Arg(10)->Arg(40);

void BM_ClassifierGradient(benchmark::State& state) {
  const auto cell = state.range(0) == 0 ? embed::CellKind::lstm : embed::CellKind::rnn;
  const auto model = make_model(cell, 100);
  auto grads = model.make_gradients();
  const auto s = sentence(12);
  math::Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(model.accumulate_gradients(s, 1, grads, true, &rng));
  state.SetLabel(embed::to_string(cell));
}
BENCHMARK(BM_ClassifierGradient)->Arg(0)->Arg(1);

void BM_SkipGramEpoch(benchmark::State& state) {
  corpus::SyntheticSpec spec;
  spec.background_sentences_per_domain = 100;
  const auto bench = corpus::synthesize_benchmark(spec);
  std::vector<corpus::Tokens> tokens;
  for (const auto& s : bench.background) tokens.push_back(s.tokens);
  const auto vocab = corpus::Vocabulary::build(tokens, 1);
  std::vector<w2v::Sequence> corpus;
  for (const auto& t : tokens) corpus.push_back(vocab.encode(t));
  w2v::SkipGramConfig config;
  config.epochs = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(w2v::train_skipgram(corpus, vocab.size(), config, 42));
}
BENCHMARK(BM_SkipGramEpoch)->Unit(benchmark::kMillisecond);

void BM_AutoencoderScore(benchmark::State& state) {
  math::Rng rng(4);
  const detect::Autoencoder ae(200, rng);
  std::vector<double> r(200);
  for (auto& x : r) x = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ae.score(r));
}
BENCHMARK(BM_AutoencoderScore);

void BM_FindEer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  math::Rng rng(5);
  std::vector<double> id(n), ood(n);
  for (auto& s : id) s = rng.uniform();
  for (auto& s : ood) s = rng.uniform() + 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(detect::find_eer(id, ood));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_FindEer)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

}  // namespace
BENCHMARK_MAIN();
