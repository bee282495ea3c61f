// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "ood/pipeline/archive.hpp"
#include "ood/pipeline/config.hpp"
#include "ood/pipeline/experiment.hpp"
#include "ood/pipeline/models.hpp"
#include "ood/pipeline/stages.hpp"

using namespace ood;
using namespace ood::pipeline;
namespace fs = std::filesystem;

namespace {

std::string serialize(const ModelArchive& a) {
  std::ostringstream out;
  write_archive(out, a);
  return out.str();
}

ModelArchive deserialize(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_archive(in);
}

ModelArchive sample_archive() {
  ModelArchive a;
  a.manifest["note"] = "sample";
  const std::vector<float> w{1.5f, -0.0f, 3.25e-30f, 7.0f, -2.0f, 0.1f};
  a.add("w", {2, 3}, w);
  a.add("b", {1}, std::vector<float>{42.0f});
  return a;
}

util::KeyValueConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return util::KeyValueConfig::parse(in);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("ood-test-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Writes a tiny benchmark and returns a matching fast configuration.
PipelineConfig tiny_pipeline(const fs::path& dir) {
  const auto bench = corpus::synthesize_benchmark(testing::small_spec(11));
  {
    std::ofstream id(dir / "id.tsv");
    corpus::write_labeled(id, bench.id);
    std::ofstream ood(dir / "ood.txt");
    corpus::write_unlabeled(ood, bench.ood);
    std::ofstream pre(dir / "pretrain.txt");
    corpus::write_unlabeled(pre, bench.background);
  }
  PipelineConfig c;
  c.id_corpus = dir / "id.tsv";
  c.ood_corpus = dir / "ood.txt";
  c.pretrain_corpus = dir / "pretrain.txt";
  c.model_dir = dir / "models";
  c.report_dir = dir / "reports";
  c.seed = 7;
  c.dim = 8;
  c.pretrain_epochs = 1;
  c.hidden = 4;
  c.embed_max_epochs = 2;
  c.embed_min_epochs = 1;
  c.detect_max_epochs = 5;
  return c;
}

}  // namespace

TEST_CASE("archive round trip is bit exact") {
  const auto a = sample_archive();
  const auto bytes = serialize(a);
  CHECK(bytes.substr(0, 4) == "OODM");
  const auto b = deserialize(bytes);
  CHECK(b.manifest.at("note") == "sample");
  REQUIRE(b.tensors.size() == 2);
  const auto& w = b.get("w", std::vector<std::size_t>{2, 3});
  CHECK(std::memcmp(w.values.data(), a.tensors[0].values.data(), 6 * sizeof(float)) == 0);
  CHECK(std::signbit(w.values[1]));
  CHECK(serialize(b) == bytes);
  CHECK(b.contains("b"));
  CHECK_FALSE(b.contains("c"));
  CHECK_THROWS_AS(b.get("w", std::vector<std::size_t>{3, 2}), ShapeMismatchError);
  CHECK_THROWS_AS(b.get("missing"), ShapeMismatchError);
  CHECK_THROWS_AS(ModelArchive{}.add("x", {2}, std::vector<float>{1.0f}), ShapeMismatchError);
}

TEST_CASE("corrupt archives raise distinct errors") {
  const auto bytes = serialize(sample_archive());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize(bad_magic), BadMagicError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_AS(deserialize(bad_version), VersionMismatchError);
  CHECK_THROWS_AS(deserialize(bytes.substr(0, bytes.size() - 3)), ShapeMismatchError);
  CHECK_THROWS_AS(deserialize(bytes + "x"), ShapeMismatchError);
  CHECK_THROWS_AS(deserialize(bytes.substr(0, 10)), ArchiveError);
  CHECK_THROWS_AS(deserialize(""), ArchiveError);
}

TEST_CASE("archive files are written atomically") {
  TempDir dir("archive");
  const auto path = dir.path / "x.oodm";
  save_archive(path, sample_archive());
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  CHECK(serialize(load_archive(path)) == serialize(sample_archive()));
  CHECK_THROWS(load_archive(dir.path / "absent.oodm"));
}

TEST_CASE("trained models survive the archive") {
  util::KeyValueConfig echo;
  echo.set("seed", "5");

  auto model = testing::small_classifier(embed::CellKind::lstm, embed::EmbeddingMode::two_channel,
                                         3, 2, 4);
  const auto vocab = corpus::Vocabulary::build(
      std::vector<corpus::Tokens>{{"a", "b", "c", "d", "e", "f", "g", "h"}}, 1);
  const TrainedClassifier trained{vocab, model};
  const auto archive = deserialize(serialize(to_archive(trained, echo)));
  CHECK(archive_stage(archive) == "train-embed");
  CHECK(archive.manifest.at("config").at("seed") == "5");
  const auto loaded = classifier_from(archive);
  CHECK(loaded.vocab == vocab);
  const std::vector<std::size_t> s{1, 4, 2};
  CHECK(embed::embed_sentence(s, loaded.classifier).values ==
        embed::embed_sentence(s, model).values);
  CHECK_THROWS_AS(word_vectors_from(archive), ShapeMismatchError);

  math::Rng rng(1);
  const TrainedDetector det{detect::Autoencoder(6, rng), 0.125};
  const auto d = detector_from(deserialize(serialize(to_archive(det, echo))));
  CHECK(d.threshold == 0.125);
  CHECK(d.autoencoder.decoder_weights() == det.autoencoder.decoder_weights());

  const Representations reps{{{0.5, -0.25}}, {{0.125, 1.0}, {0.0, 0.0}}};
  const auto r = representations_from(deserialize(serialize(to_archive(reps, echo))));
  CHECK(r.fit == reps.fit);
  CHECK(r.validation == reps.validation);
}

TEST_CASE("pipeline configuration") {
  const auto c = PipelineConfig::from_config(
      parse_config("seed = 3\nid_corpus = data/id.tsv\ncell = rnn\nhidden = 150\n"), "/base");
  CHECK(c.seed == 3);
  CHECK(c.cell == embed::CellKind::rnn);
  CHECK(c.hidden == 150);
  CHECK(c.id_corpus == fs::path("/base/data/id.tsv"));

  CHECK_THROWS_AS(PipelineConfig::from_config(parse_config("hidden = 100\n")), util::ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_config(parse_config("seed = 1\nhiden = 100\n")),
                  util::ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_config(parse_config("seed = 1\ncell = gru\n")),
                  util::ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_config(parse_config("seed = 1\ndropout = 1.5\n")),
                  util::ConfigError);

  const auto echoed = PipelineConfig::from_config(c.to_config());
  CHECK(echoed.to_config().values() == c.to_config().values());
}

TEST_CASE("artifact names follow the settings that produced them") {
  TempDir dir("digest");
  auto c = tiny_pipeline(dir.path);
  const auto base = stage_digest(c, Stage::train_embed);
  CHECK(stage_digest(c, Stage::train_embed) == base);
  CHECK(artifact_path(c, Stage::pretrain).filename().string().rfind("pretrain-", 0) == 0);

  auto other = c;
  other.hidden = 6;
  CHECK(stage_digest(other, Stage::train_embed) != base);
  CHECK(stage_digest(other, Stage::pretrain) == stage_digest(c, Stage::pretrain));

  other = c;
  other.window = 3;  // upstream change propagates
  CHECK(stage_digest(other, Stage::train_detect) != stage_digest(c, Stage::train_detect));

  other = c;
  other.detect_patience = 4;  // downstream change does not
  CHECK(stage_digest(other, Stage::train_embed) == base);

  // Input file contents are part of the digest.
  std::ofstream(dir.path / "id.tsv", std::ios::app) << "domain0\textra words here\n";
  CHECK(stage_digest(c, Stage::train_embed) != base);
}

TEST_CASE("stages chain through their artifacts") {
  TempDir dir("stages");
  const auto c = tiny_pipeline(dir.path);
  CHECK_THROWS_AS(run_train_embed_stage(c), MissingArtifactError);
  try {
    run_eval_stage(c);
    FAIL("expected a missing artifact");
  } catch (const MissingArtifactError& e) {
    CHECK(e.stage() == Stage::train_embed);
  }

  const auto pre = run_pretrain_stage(c);
  CHECK(fs::exists(pre));
  CHECK(archive_stage(load_archive(pre)) == "pretrain");
  CHECK(load_archive(pre).manifest.at("config").at("seed") == "7");
  run_train_embed_stage(c);
  run_embed_stage(c);
  const auto det = run_train_detect_stage(c);
  CHECK(detector_from(load_archive(det)).threshold > 0.0);

  const auto outputs = run_eval_stage(c);
  for (const char* name : {"curve.csv", "scores.csv", "length_groups.csv", "summary.txt"})
    CHECK(fs::exists(c.report_dir / name));
  std::ifstream summary(c.report_dir / "summary.txt");
  const std::string text((std::istreambuf_iterator<char>(summary)), {});
  CHECK(text.find("eer=") != std::string::npos);
  (void)outputs;

  auto rnn = c;
  rnn.cell = embed::CellKind::rnn;
  CHECK_THROWS_AS(run_eval_stage(rnn), MissingArtifactError);

  auto bow = c;
  bow.baseline = "bow-1+nnd";
  run_eval_stage(bow);
  CHECK(fs::exists(bow.report_dir / "curve.csv"));
}

TEST_CASE("training data must be in-domain") {
  std::vector<corpus::LabeledSentence> s{{{"a"}, "x", corpus::Origin::in_domain}};
  CHECK_NOTHROW(require_in_domain(s, "train"));
  s.push_back({{"b"}, std::nullopt, corpus::Origin::out_of_domain});
  CHECK_THROWS_AS(require_in_domain(s, "train"), std::invalid_argument);
}

TEST_CASE("experiment splits") {
  const auto bench = corpus::synthesize_benchmark(testing::small_spec(12));
  const auto data = make_experiment_data(bench.id, bench.ood, {}, 10, 3);
  CHECK(data.fit.size() + data.validation.size() + data.test_id.size() == bench.id.size());
  CHECK(data.test_id.size() == 24);
  CHECK(data.validation.size() == 10);
  CHECK(data.test_ood.size() == bench.ood.size());
}

TEST_CASE("representation and detector names") {
  for (const char* name : {"bow-1", "bow-3", "tfidf-2", "nbow", "dc-lstm-two-channel",
                           "dc-rnn-static", "dc-lstm-random", "dc-rnn-non-static"})
    CHECK(RepresentationSpec::parse(name).name() == name);
  CHECK_THROWS(RepresentationSpec::parse("bow-4"));
  CHECK_THROWS(RepresentationSpec::parse("dc-gru-static"));
  for (const char* name : {"ae", "nnd", "cbc", "idv"}) CHECK(to_string(parse_detector(name)) == name);
  CHECK_THROWS(parse_detector("svm"));
  CHECK(default_grid_representations().size() == 15);
}

TEST_CASE("length groups and number formatting") {
  const auto groups = length_groups();
  REQUIRE(groups.size() == 4);
  CHECK(groups[0].min_length == 1);
  CHECK(groups[0].max_length == 8);
  CHECK(groups[1].min_length == 9);
  CHECK(groups[2].max_length == 22);
  CHECK(groups[3].max_length == corpus::kMaxSentenceLength);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("grid output does not depend on the thread count") {
  const auto bench = corpus::synthesize_benchmark(testing::small_spec(13));
  const auto data = make_experiment_data(bench.id, bench.ood, {}, 10, 13);
  PipelineConfig c;
  c.seed = 13;
  c.dim = 8;
  c.pretrain_epochs = 1;
  c.pretrain_min_count = 1;
  c.detect_max_epochs = 5;
  ExperimentData pre = data;
  const auto vectors = pretrain_word_vectors(pre, c);
  const std::vector<std::string> reps{"bow-1", "tfidf-2", "nbow"};
  const std::vector<std::string> dets{"ae", "nnd", "cbc", "idv"};
  c.threads = 1;
  const auto serial = run_grid(data, vectors, c, reps, dets);
  c.threads = 3;
  const auto parallel = run_grid(data, vectors, c, reps, dets);
  std::ostringstream a, b;
  write_grid_csv(a, serial);
  write_grid_csv(b, parallel);
  CHECK(a.str() == b.str());
  CHECK(serial.size() == 12);
  CHECK(a.str().rfind("representation,classifier,eer\n", 0) == 0);
  const auto text = a.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 12 + 8);
}

TEST_CASE("grid csv reports the best n per family") {
  const std::vector<GridCell> cells{{"bow-1", "ae", 0.3}, {"bow-2", "ae", 0.2},
                                    {"bow-3", "nnd", 0.4}, {"nbow", "ae", 0.1},
                                    {"tfidf-2", "cbc", 0.25}};
  std::ostringstream out;
  write_grid_csv(out, cells);
  const auto text = out.str();
  CHECK(text.find("bow-best,ae,0.2\n") != std::string::npos);
  CHECK(text.find("bow-best,nnd,0.4\n") != std::string::npos);
  CHECK(text.find("tfidf-best,cbc,0.25\n") != std::string::npos);
  CHECK(text.find("nbow-best") == std::string::npos);
}
