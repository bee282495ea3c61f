// SPDX-License-Identifier: Apache-2.0
#include "ood/pipeline/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "ood/baselines/jaccard.hpp"
#include "ood/baselines/linear_ovr.hpp"
#include "ood/baselines/nearest_neighbor.hpp"
#include "ood/util/log.hpp"
#include "ood/word2vec/skipgram.hpp"

namespace ood::pipeline {

using baselines::SparseVector;
using corpus::LabeledSentence;

ExperimentData make_experiment_data(std::span<const LabeledSentence> id,
                                    std::span<const LabeledSentence> ood,
                                    std::vector<corpus::Tokens> pretrain_text,
                                    unsigned validation_percent, std::uint64_t seed) {
  require_in_domain(id, "experiment");
  auto split = corpus::split_train_test(id, seed);
  auto [fit, validation] =
      corpus::stratified_split(split.train, 100 - validation_percent, seed + 1);
  ExperimentData data;
  data.fit = std::move(fit);
  data.validation = std::move(validation);
  data.test_id = std::move(split.test_id);
  for (const auto& s : ood) {
    auto copy = s;
    copy.origin = corpus::Origin::out_of_domain;
    data.test_ood.push_back(std::move(copy));
  }
  data.pretrain_text = std::move(pretrain_text);
  return data;
}

ExperimentData load_experiment_data(const PipelineConfig& config, bool with_ood) {
  if (config.id_corpus.empty()) throw util::ConfigError("id_corpus is not set");
  const auto id = corpus::read_labeled(config.id_corpus);
  std::vector<LabeledSentence> ood;
  if (with_ood) {
    if (config.ood_corpus.empty()) throw util::ConfigError("ood_corpus is not set");
    ood = corpus::read_unlabeled(config.ood_corpus, corpus::Origin::out_of_domain);
  }
  std::vector<corpus::Tokens> pretrain;
  if (!config.pretrain_corpus.empty())
    for (auto& s : corpus::read_unlabeled(config.pretrain_corpus, corpus::Origin::in_domain))
      pretrain.push_back(std::move(s.tokens));
  return make_experiment_data(id, ood, std::move(pretrain), config.validation_percent,
                              config.seed);
}

void require_in_domain(std::span<const LabeledSentence> sentences, std::string_view stage) {
  for (const auto& s : sentences)
    if (s.origin != corpus::Origin::in_domain)
      throw std::invalid_argument(std::string(stage) + ": OOD sentences are not accepted here");
}

namespace {

std::vector<corpus::Tokens> token_lists(std::span<const LabeledSentence> sentences) {
  std::vector<corpus::Tokens> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.tokens);
  return out;
}

}  // namespace

WordVectors pretrain_word_vectors(const ExperimentData& data, const PipelineConfig& config) {
  require_in_domain(data.fit, "pretrain");
  const auto fit_tokens = token_lists(data.fit);
  const bool own_text = !data.pretrain_text.empty();
  corpus::Vocabulary vocab = own_text
                                 ? corpus::Vocabulary::build(data.pretrain_text,
                                                             config.pretrain_min_count)
                                 : corpus::Vocabulary::build(fit_tokens, 1);
  vocab.extend(fit_tokens, 1);

  const auto& text = own_text ? data.pretrain_text : fit_tokens;
  std::vector<w2v::Sequence> sequences;
  sequences.reserve(text.size());
  for (const auto& t : text) sequences.push_back(vocab.encode(t));

  w2v::SkipGramConfig sg;
  sg.dim = config.dim;
  sg.window = config.window;
  sg.negatives = config.negatives;
  sg.learning_rate = config.pretrain_learning_rate;
  sg.epochs = config.pretrain_epochs;
  auto vectors = w2v::train_skipgram(sequences, vocab.size(), sg, config.seed);
  return {std::move(vocab), std::move(vectors)};
}

TrainedClassifier train_embedder(const ExperimentData& data, const WordVectors& vectors,
                                 const PipelineConfig& config, embed::TrainingReport* report) {
  require_in_domain(data.fit, "train-embed");
  require_in_domain(data.validation, "train-embed");
  auto model = embed::train_classifier(data.fit, data.validation, vectors.vocab,
                                       vectors.vectors, config.classifier_config(), report);
  return {vectors.vocab, std::move(model)};
}

detect::AutoencoderConfig autoencoder_config(const PipelineConfig& config) {
  detect::AutoencoderConfig c;
  c.optimizer = math::OptimizerConfig::defaults(config.detect_optimizer);
  c.max_epochs = config.detect_max_epochs;
  c.patience = config.detect_patience;
  c.batch_size = config.batch_size;
  c.seed = config.seed;
  return c;
}

// ---------------------------------------------------------------------------

RepresentationSpec RepresentationSpec::parse(std::string_view name) {
  RepresentationSpec spec;
  auto ngram = [&](std::string_view prefix, Kind kind) -> bool {
    if (name.substr(0, prefix.size()) != prefix) return false;
    const auto rest = name.substr(prefix.size());
    if (rest.size() != 1 || rest[0] < '1' || rest[0] > '3')
      throw std::invalid_argument("representation " + std::string(name) +
                                  ": n-gram order must be 1, 2 or 3");
    spec.kind = kind;
    spec.n_max = static_cast<std::size_t>(rest[0] - '0');
    return true;
  };
  if (ngram("bow-", Kind::bow) || ngram("tfidf-", Kind::tfidf)) return spec;
  if (name == "nbow") {
    spec.kind = Kind::neural_bow;
    return spec;
  }
  for (const auto* cell : {"lstm", "rnn"}) {
    const std::string prefix = std::string("dc-") + cell + "-";
    if (name.substr(0, prefix.size()) == prefix) {
      spec.kind = Kind::supervised;
      spec.cell = embed::parse_cell_kind(cell);
      spec.mode = embed::parse_embedding_mode(name.substr(prefix.size()));
      return spec;
    }
  }
  throw std::invalid_argument("unknown representation " + std::string(name));
}

std::string RepresentationSpec::name() const {
  switch (kind) {
    case Kind::bow: return "bow-" + std::to_string(n_max);
    case Kind::tfidf: return "tfidf-" + std::to_string(n_max);
    case Kind::neural_bow: return "nbow";
    case Kind::supervised: return "dc-" + embed::to_string(cell) + "-" + embed::to_string(mode);
  }
  return "unknown";
}

DetectorKind parse_detector(std::string_view name) {
  if (name == "ae") return DetectorKind::autoencoder;
  if (name == "nnd") return DetectorKind::nearest_neighbor;
  if (name == "cbc") return DetectorKind::cbc;
  if (name == "idv") return DetectorKind::idv;
  throw std::invalid_argument("unknown detector " + std::string(name) +
                              " (expected ae, nnd, cbc or idv)");
}

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::autoencoder: return "ae";
    case DetectorKind::nearest_neighbor: return "nnd";
    case DetectorKind::cbc: return "cbc";
    case DetectorKind::idv: return "idv";
  }
  return "unknown";
}

namespace {

template <typename F>
std::vector<SparseVector> map_split(std::span<const LabeledSentence> sentences, F&& f) {
  std::vector<SparseVector> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(f(s));
  return out;
}

template <typename F>
FeatureSet map_all(const ExperimentData& data, std::size_t width, bool nonnegative, F&& f) {
  FeatureSet fs;
  fs.width = width;
  fs.nonnegative = nonnegative;
  fs.fit = map_split(data.fit, f);
  fs.validation = map_split(data.validation, f);
  fs.test_id = map_split(data.test_id, f);
  fs.test_ood = map_split(data.test_ood, f);
  return fs;
}

}  // namespace

FeatureSet compute_features(const RepresentationSpec& spec, const ExperimentData& data,
                            const WordVectors& vectors, std::size_t max_features) {
  using Kind = RepresentationSpec::Kind;
  switch (spec.kind) {
    case Kind::bow:
    case Kind::tfidf: {
      const auto index =
          baselines::NgramIndex::build(token_lists(data.fit), spec.n_max, max_features);
      const bool tfidf = spec.kind == Kind::tfidf;
      return map_all(data, index.size(), true, [&](const LabeledSentence& s) {
        return tfidf ? baselines::tfidf_vector(s.tokens, index)
                     : baselines::bow_vector(s.tokens, index);
      });
    }
    case Kind::neural_bow:
      return map_all(data, vectors.vectors.dim(), false, [&](const LabeledSentence& s) {
        return SparseVector::from_dense(
            baselines::neural_bow(vectors.vocab.encode(s.tokens), vectors.vectors));
      });
    case Kind::supervised:
      throw std::invalid_argument("supervised features need a trained embedder");
  }
  throw std::logic_error("unhandled representation");
}

FeatureSet supervised_features(const TrainedClassifier& model, const ExperimentData& data) {
  return map_all(data, model.classifier.representation_size(), false,
                 [&](const LabeledSentence& s) {
                   return SparseVector::from_dense(
                       embed::embed_sentence(model.vocab.encode(s.tokens), model.classifier)
                           .values);
                 });
}

namespace {

// Autoencoder input: dense, even width. Nonnegative n-gram vectors are scaled
// to unit length so they stay within the tanh output range.
math::VectorD autoencoder_input(const SparseVector& x, const FeatureSet& fs) {
  auto dense = x.to_dense(fs.width + fs.width % 2);
  if (fs.nonnegative) {
    const double norm = std::sqrt(x.squared_norm());
    if (norm > 0.0)
      for (auto& v : dense) v /= norm;
  }
  return dense;
}

SparseVector jaccard_input(const SparseVector& x, const FeatureSet& fs) {
  if (fs.nonnegative) return x;
  return baselines::split_signs(x.to_dense(fs.width));
}

std::vector<double> cbc_scores(const baselines::LinearOvrClassifier& model,
                               std::span<const SparseVector> xs, bool sigmoid) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs)
    out.push_back(-(sigmoid ? baselines::idv_score(model, x) : baselines::cbc_score(model, x)));
  return out;
}

}  // namespace

DetectionScores score_detector(DetectorKind kind, const FeatureSet& fs, const ExperimentData& data,
                               const PipelineConfig& config) {
  DetectionScores scores;
  switch (kind) {
    case DetectorKind::autoencoder: {
      std::vector<math::VectorD> inputs;
      for (const auto& x : fs.fit) inputs.push_back(autoencoder_input(x, fs));
      const auto ae = detect::train_autoencoder(inputs, autoencoder_config(config));
      for (const auto& x : fs.test_id) scores.id.push_back(ae.score(autoencoder_input(x, fs)));
      for (const auto& x : fs.test_ood) scores.ood.push_back(ae.score(autoencoder_input(x, fs)));
      break;
    }
    case DetectorKind::nearest_neighbor: {
      std::vector<SparseVector> train;
      for (const auto& x : fs.fit) train.push_back(jaccard_input(x, fs));
      auto distance = [](const SparseVector& a, const SparseVector& b) {
        return baselines::weighted_jaccard_distance(a, b);
      };
      baselines::NearestNeighborScorer<SparseVector, decltype(distance)> scorer(
          std::move(train), distance);
      for (const auto& x : fs.test_id) scores.id.push_back(scorer.score(jaccard_input(x, fs)));
      for (const auto& x : fs.test_ood) scores.ood.push_back(scorer.score(jaccard_input(x, fs)));
      break;
    }
    case DetectorKind::cbc:
    case DetectorKind::idv: {
      std::vector<std::string> labels;
      for (const auto& s : data.fit) labels.push_back(s.label.value());
      baselines::OvrConfig oc;
      oc.seed = config.seed;
      const auto model = baselines::train_ovr(fs.fit, labels, fs.width, oc);
      const bool sigmoid = kind == DetectorKind::idv;
      scores.id = cbc_scores(model, fs.test_id, sigmoid);
      scores.ood = cbc_scores(model, fs.test_ood, sigmoid);
      break;
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------

std::span<const LengthGroup> length_groups() {
  static constexpr std::array<LengthGroup, 4> kGroups = {
      LengthGroup{1, 8}, LengthGroup{9, 11}, LengthGroup{12, 22},
      LengthGroup{23, corpus::kMaxSentenceLength}};
  return kGroups;
}

EvalReport make_report(std::string method, const ExperimentData& data, DetectionScores scores) {
  EvalReport r;
  r.method = std::move(method);
  r.curve = detect::find_eer(scores.id, scores.ood);
  r.id_scores = std::move(scores.id);
  r.ood_scores = std::move(scores.ood);
  for (const auto& s : data.test_id) r.id_lengths.push_back(s.tokens.size());
  for (const auto& s : data.test_ood) r.ood_lengths.push_back(s.tokens.size());
  return r;
}

std::optional<double> eer_for_lengths(const EvalReport& report, std::size_t min_length,
                                      std::size_t max_length) {
  auto pick = [&](const std::vector<double>& scores, const std::vector<std::size_t>& lengths) {
    std::vector<double> out;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (lengths[i] >= min_length && lengths[i] <= max_length) out.push_back(scores[i]);
    return out;
  };
  const auto id = pick(report.id_scores, report.id_lengths);
  const auto ood = pick(report.ood_scores, report.ood_lengths);
  if (id.empty() || ood.empty()) return std::nullopt;
  return detect::find_eer(id, ood).eer;
}

std::vector<LengthGroupResult> length_group_results(const EvalReport& report) {
  std::vector<LengthGroupResult> out;
  for (const auto& g : length_groups()) {
    LengthGroupResult r{g, 0, 0, std::nullopt};
    for (auto len : report.id_lengths) r.id_count += len >= g.min_length && len <= g.max_length;
    for (auto len : report.ood_lengths) r.ood_count += len >= g.min_length && len <= g.max_length;
    r.eer = eer_for_lengths(report, g.min_length, g.max_length);
    out.push_back(r);
  }
  return out;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_number failed");
  return std::string(buf.data(), ptr);
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string group_name(const LengthGroup& g) {
  return std::to_string(g.min_length) + "-" + std::to_string(g.max_length);
}

}  // namespace

void write_summary(std::ostream& out, const EvalReport& report) {
  out << "method=" << report.method << '\n';
  out << "eer=" << format_number(report.curve.eer) << '\n';
  out << "eer_threshold=" << format_number(report.curve.eer_threshold) << '\n';
  out << "id_test_sentences=" << report.id_scores.size() << '\n';
  out << "ood_test_sentences=" << report.ood_scores.size() << '\n';
  out << "mean_id_score=" << format_number(mean(report.id_scores)) << '\n';
  out << "mean_ood_score=" << format_number(mean(report.ood_scores)) << '\n';
  if (report.domain_accuracy)
    out << "domain_accuracy=" << format_number(*report.domain_accuracy) << '\n';
  if (report.threshold) {
    out << "deployment_threshold=" << format_number(*report.threshold) << '\n';
    out << "deployment_far=" << format_number(detect::far(report.ood_scores, *report.threshold))
        << '\n';
    out << "deployment_frr=" << format_number(detect::frr(report.id_scores, *report.threshold))
        << '\n';
  }
  for (const auto& g : length_group_results(report))
    out << "eer_length_" << group_name(g.group) << '='
        << (g.eer ? format_number(*g.eer) : std::string("n/a")) << '\n';
}

void write_length_groups_csv(std::ostream& out, const EvalReport& report) {
  out << "group,id_sentences,ood_sentences,eer\n";
  for (const auto& g : length_group_results(report))
    out << group_name(g.group) << ',' << g.id_count << ',' << g.ood_count << ','
        << (g.eer ? format_number(*g.eer) : std::string()) << '\n';
}

void write_scores_csv(std::ostream& out, const EvalReport& report) {
  out << "split,index,length,score\n";
  for (std::size_t i = 0; i < report.id_scores.size(); ++i)
    out << "id," << i << ',' << report.id_lengths[i] << ',' << format_number(report.id_scores[i])
        << '\n';
  for (std::size_t i = 0; i < report.ood_scores.size(); ++i)
    out << "ood," << i << ',' << report.ood_lengths[i] << ','
        << format_number(report.ood_scores[i]) << '\n';
}

// ---------------------------------------------------------------------------

PipelineResult run_supervised_pipeline(const ExperimentData& data, const PipelineConfig& config) {
  auto vectors = pretrain_word_vectors(data, config);
  embed::TrainingReport training;
  auto embedder = train_embedder(data, vectors, config, &training);
  auto features = supervised_features(embedder, data);

  std::vector<math::VectorD> fit;
  for (const auto& x : features.fit) fit.push_back(x.to_dense(features.width));
  detect::AutoencoderReport ae_report;
  auto ae = detect::train_autoencoder(fit, autoencoder_config(config), &ae_report);

  std::vector<double> validation_scores;
  for (const auto& x : features.validation)
    validation_scores.push_back(ae.score(x.to_dense(features.width)));
  const double threshold =
      detect::deployment_threshold(validation_scores, config.threshold_quantile);

  DetectionScores scores;
  for (const auto& x : features.test_id) scores.id.push_back(ae.score(x.to_dense(features.width)));
  for (const auto& x : features.test_ood)
    scores.ood.push_back(ae.score(x.to_dense(features.width)));

  RepresentationSpec spec;
  spec.cell = config.cell;
  spec.mode = config.mode;
  auto report = make_report(spec.name() + "+ae", data, std::move(scores));
  report.domain_accuracy =
      embed::domain_accuracy(embedder.classifier, embedder.vocab, data.test_id);
  report.threshold = threshold;
  return {std::move(vectors),
          std::move(embedder),
          TrainedDetector{std::move(ae), threshold},
          std::move(training),
          std::move(ae_report),
          std::move(features),
          std::move(report)};
}

std::vector<SweepRow> domain_sweep(std::span<const LabeledSentence> id,
                                   std::span<const LabeledSentence> ood,
                                   const std::vector<corpus::Tokens>& pretrain_text,
                                   const PipelineConfig& config) {
  const auto labels = corpus::domain_labels(id);
  if (labels.size() < 2) throw std::invalid_argument("domain sweep needs at least two domains");
  std::vector<SweepRow> rows;
  for (std::size_t d = 2; d <= labels.size(); ++d) {
    const std::set<std::string> keep(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(d));
    std::vector<LabeledSentence> subset;
    for (const auto& s : id)
      if (keep.count(*s.label)) subset.push_back(s);
    const auto data =
        make_experiment_data(subset, ood, pretrain_text, config.validation_percent, config.seed);
    const auto result = run_supervised_pipeline(data, config);
    rows.push_back({d, result.report.curve.eer, result.report.domain_accuracy.value_or(0.0)});
    util::log_info("domain sweep: |D|=" + std::to_string(d) +
                   " eer=" + format_number(rows.back().eer));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "domains,eer,domain_accuracy\n";
  for (const auto& r : rows)
    out << r.domains << ',' << format_number(r.eer) << ',' << format_number(r.domain_accuracy)
        << '\n';
}

std::vector<GridCell> run_grid(const ExperimentData& data, const WordVectors& vectors,
                               const PipelineConfig& config,
                               std::span<const std::string> representations,
                               std::span<const std::string> detectors) {
  std::vector<RepresentationSpec> specs;
  for (const auto& r : representations) specs.push_back(RepresentationSpec::parse(r));
  std::vector<DetectorKind> kinds;
  for (const auto& d : detectors) kinds.push_back(parse_detector(d));

  std::vector<GridCell> cells(specs.size() * kinds.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto work = [&] {
    for (std::size_t r = next++; r < specs.size(); r = next++) {
      try {
        const auto& spec = specs[r];
        std::optional<FeatureSet> features;
        std::optional<FeatureSet> ae_features;
        if (spec.kind == RepresentationSpec::Kind::supervised) {
          auto cfg = config;
          cfg.cell = spec.cell;
          cfg.mode = spec.mode;
          features = supervised_features(train_embedder(data, vectors, cfg), data);
        } else {
          features = compute_features(spec, data, vectors);
          const bool ngram = spec.kind != RepresentationSpec::Kind::neural_bow;
          if (ngram) ae_features = compute_features(spec, data, vectors, config.ae_max_features);
        }
        for (std::size_t k = 0; k < kinds.size(); ++k) {
          const auto& fs = kinds[k] == DetectorKind::autoencoder && ae_features ? *ae_features
                                                                                 : *features;
          const auto scores = score_detector(kinds[k], fs, data, config);
          cells[r * kinds.size() + k] = {spec.name(), to_string(kinds[k]),
                                         detect::find_eer(scores.id, scores.ood).eer};
          util::log_info("grid: " + spec.name() + " x " + to_string(kinds[k]) +
                         " eer=" + format_number(cells[r * kinds.size() + k].eer));
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min(config.threads, std::max<std::size_t>(1, specs.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return cells;
}

void write_grid_csv(std::ostream& out, std::span<const GridCell> cells) {
  out << "representation,classifier,eer\n";
  for (const auto& c : cells)
    out << c.representation << ',' << c.detector << ',' << format_number(c.eer) << '\n';

  // Best n per n-gram family and detector, in first-appearance order.
  for (const std::string family : {"bow", "tfidf"}) {
    std::vector<std::pair<std::string, double>> best;
    for (const auto& c : cells) {
      const auto spec = RepresentationSpec::parse(c.representation);
      const bool member = (family == "bow" && spec.kind == RepresentationSpec::Kind::bow) ||
                          (family == "tfidf" && spec.kind == RepresentationSpec::Kind::tfidf);
      if (!member) continue;
      auto it = std::find_if(best.begin(), best.end(),
                             [&](const auto& b) { return b.first == c.detector; });
      if (it == best.end()) best.emplace_back(c.detector, c.eer);
      else it->second = std::min(it->second, c.eer);
    }
    for (const auto& [detector, eer] : best)
      out << family << "-best," << detector << ',' << format_number(eer) << '\n';
  }
}

std::vector<std::string> default_grid_representations() {
  return {"bow-1",         "bow-2",   "bow-3",          "tfidf-1",
          "tfidf-2",       "tfidf-3", "nbow",           "dc-rnn-random",
          "dc-rnn-static", "dc-rnn-non-static",         "dc-rnn-two-channel",
          "dc-lstm-random", "dc-lstm-static", "dc-lstm-non-static", "dc-lstm-two-channel"};
}

std::vector<std::string> default_grid_detectors() { return {"ae", "nnd", "cbc", "idv"}; }

}  // namespace ood::pipeline
