// SPDX-License-Identifier: Apache-2.0
#include "ood/pipeline/models.hpp"

#include <optional>

namespace ood::pipeline {

namespace {

using Shape = std::vector<std::size_t>;

nlohmann::json echo_json(const util::KeyValueConfig& config) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : config.values()) out[k] = v;
  return out;
}

void expect_stage(const ModelArchive& archive, const std::string& stage) {
  const auto found = archive_stage(archive);
  if (found != stage)
    throw ShapeMismatchError("expected a " + stage + " archive, found stage '" + found + "'");
}

template <typename T>
T manifest_value(const ModelArchive& archive, const char* key) {
  try {
    return archive.manifest.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(std::string("manifest field ") + key + ": " + e.what());
  }
}

void add_matrix(ModelArchive& a, std::string name, const math::Matrix& m) {
  a.add(std::move(name), {m.rows(), m.cols()}, m.values());
}

void add_vector(ModelArchive& a, std::string name, const math::Vector& v) {
  a.add(std::move(name), {v.size()}, v);
}

void read_matrix(const ModelArchive& a, std::string_view name, math::Matrix& into) {
  const Shape shape{into.rows(), into.cols()};
  const auto& t = a.get(name, shape);
  std::copy(t.values.begin(), t.values.end(), into.values().begin());
}

math::Matrix load_matrix(const ModelArchive& a, std::string_view name, std::size_t rows,
                         std::size_t cols) {
  math::Matrix m(rows, cols);
  read_matrix(a, name, m);
  return m;
}

math::Vector load_vector(const ModelArchive& a, std::string_view name, std::size_t size) {
  const Shape shape{size};
  const auto& t = a.get(name, shape);
  return t.values;
}

math::EmbeddingMatrix load_embedding(const ModelArchive& a, std::string_view name,
                                     std::size_t dim, std::size_t vocab_size) {
  math::EmbeddingMatrix e(dim, vocab_size);
  read_matrix(a, name, e.storage());
  return e;
}

corpus::Vocabulary load_vocab(const ModelArchive& a) {
  try {
    return corpus::Vocabulary(manifest_value<std::vector<std::string>>(a, "vocabulary"));
  } catch (const std::invalid_argument& e) {
    throw ArchiveError(std::string("manifest vocabulary: ") + e.what());
  }
}

void add_cell(ModelArchive& a, const std::string& prefix, const embed::RecurrentCell& cell) {
  add_matrix(a, prefix + ".weights", cell.weights());
  add_vector(a, prefix + ".bias", cell.bias());
}

embed::RecurrentCell load_cell(const ModelArchive& a, const std::string& prefix,
                               embed::CellKind kind, std::size_t hidden, std::size_t input) {
  embed::RecurrentCell cell(kind, hidden, input);
  read_matrix(a, prefix + ".weights", cell.weights());
  cell.bias() = load_vector(a, prefix + ".bias", cell.bias().size());
  return cell;
}

std::vector<math::VectorD> load_rows(const ModelArchive& a, std::string_view name) {
  const auto& t = a.get(name);
  if (t.shape.size() != 2) throw ShapeMismatchError("tensor " + std::string(name) + " is not 2-D");
  std::vector<math::VectorD> rows(t.shape[0]);
  for (std::size_t r = 0; r < rows.size(); ++r)
    rows[r].assign(t.values.begin() + static_cast<std::ptrdiff_t>(r * t.shape[1]),
                   t.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.shape[1]));
  return rows;
}

void add_rows(ModelArchive& a, std::string name, const std::vector<math::VectorD>& rows,
              std::size_t width) {
  std::vector<float> flat;
  flat.reserve(rows.size() * width);
  for (const auto& r : rows) {
    if (r.size() != width) throw ShapeMismatchError("representation widths differ");
    for (double v : r) flat.push_back(static_cast<float>(v));
  }
  a.add(std::move(name), {rows.size(), width}, flat);
}

}  // namespace

std::string archive_stage(const ModelArchive& archive) {
  if (!archive.manifest.contains("stage") || !archive.manifest["stage"].is_string()) return "";
  return archive.manifest["stage"].get<std::string>();
}

ModelArchive to_archive(const WordVectors& model, const util::KeyValueConfig& config_echo) {
  ModelArchive a;
  a.manifest["stage"] = "pretrain";
  a.manifest["dim"] = model.vectors.dim();
  a.manifest["vocabulary"] = model.vocab.tokens();
  a.manifest["config"] = echo_json(config_echo);
  add_matrix(a, "word_vectors", model.vectors.storage());
  return a;
}

WordVectors word_vectors_from(const ModelArchive& archive) {
  expect_stage(archive, "pretrain");
  auto vocab = load_vocab(archive);
  const auto dim = manifest_value<std::size_t>(archive, "dim");
  auto vectors = load_embedding(archive, "word_vectors", dim, vocab.size());
  return {std::move(vocab), std::move(vectors)};
}

ModelArchive to_archive(const TrainedClassifier& model, const util::KeyValueConfig& config_echo) {
  const auto& c = model.classifier;
  const auto& e = c.embedding();
  ModelArchive a;
  a.manifest["stage"] = "train-embed";
  a.manifest["cell"] = embed::to_string(c.cell_kind());
  a.manifest["mode"] = embed::to_string(c.mode());
  a.manifest["hidden"] = c.hidden_size();
  a.manifest["dim"] = e.dim();
  a.manifest["dropout"] = c.dropout();
  a.manifest["labels"] = c.labels();
  a.manifest["vocabulary"] = model.vocab.tokens();
  a.manifest["config"] = echo_json(config_echo);
  if (e.has_static()) add_matrix(a, "embedding.static", e.static_channel().storage());
  if (e.has_tuned()) add_matrix(a, "embedding.tuned", e.tuned_channel().storage());
  add_cell(a, "forward", c.forward_cell());
  add_cell(a, "backward", c.backward_cell());
  add_matrix(a, "output.weights", c.output_weights());
  add_vector(a, "output.bias", c.output_bias());
  return a;
}

TrainedClassifier classifier_from(const ModelArchive& archive) {
  expect_stage(archive, "train-embed");
  auto vocab = load_vocab(archive);
  embed::CellKind cell;
  embed::EmbeddingMode mode;
  try {
    cell = embed::parse_cell_kind(manifest_value<std::string>(archive, "cell"));
    mode = embed::parse_embedding_mode(manifest_value<std::string>(archive, "mode"));
  } catch (const std::invalid_argument& e) {
    throw ArchiveError(std::string("manifest: ") + e.what());
  }
  const auto hidden = manifest_value<std::size_t>(archive, "hidden");
  const auto dim = manifest_value<std::size_t>(archive, "dim");
  const auto dropout = manifest_value<double>(archive, "dropout");
  auto labels = manifest_value<std::vector<std::string>>(archive, "labels");

  std::optional<math::EmbeddingMatrix> static_channel;
  std::optional<math::EmbeddingMatrix> tuned_channel;
  if (archive.contains("embedding.static"))
    static_channel = load_embedding(archive, "embedding.static", dim, vocab.size());
  if (archive.contains("embedding.tuned"))
    tuned_channel = load_embedding(archive, "embedding.tuned", dim, vocab.size());
  std::optional<embed::TwoChannelEmbedding> embedding;
  try {
    embedding.emplace(mode, std::move(static_channel), std::move(tuned_channel));
  } catch (const std::invalid_argument& e) {
    throw ShapeMismatchError(e.what());
  }
  const std::size_t input = embedding->width();
  auto forward = load_cell(archive, "forward", cell, hidden, input);
  auto backward = load_cell(archive, "backward", cell, hidden, input);
  auto out_w = load_matrix(archive, "output.weights", labels.size(), 2 * hidden);
  auto out_b = load_vector(archive, "output.bias", labels.size());
  embed::BiLstmClassifier classifier(std::move(*embedding), std::move(forward),
                                     std::move(backward), std::move(out_w), std::move(out_b),
                                     std::move(labels), dropout);
  return {std::move(vocab), std::move(classifier)};
}

ModelArchive to_archive(const Representations& reps, const util::KeyValueConfig& config_echo) {
  const std::size_t width = reps.fit.empty() ? 0 : reps.fit.front().size();
  ModelArchive a;
  a.manifest["stage"] = "embed";
  a.manifest["width"] = width;
  a.manifest["config"] = echo_json(config_echo);
  add_rows(a, "fit", reps.fit, width);
  add_rows(a, "validation", reps.validation, width);
  return a;
}

Representations representations_from(const ModelArchive& archive) {
  expect_stage(archive, "embed");
  return {load_rows(archive, "fit"), load_rows(archive, "validation")};
}

ModelArchive to_archive(const TrainedDetector& model, const util::KeyValueConfig& config_echo) {
  const auto& ae = model.autoencoder;
  ModelArchive a;
  a.manifest["stage"] = "train-detect";
  a.manifest["input_size"] = ae.input_size();
  a.manifest["threshold"] = model.threshold;
  a.manifest["config"] = echo_json(config_echo);
  add_matrix(a, "encoder.weights", ae.encoder_weights());
  add_vector(a, "encoder.bias", ae.encoder_bias());
  add_matrix(a, "decoder.weights", ae.decoder_weights());
  add_vector(a, "decoder.bias", ae.decoder_bias());
  return a;
}

TrainedDetector detector_from(const ModelArchive& archive) {
  expect_stage(archive, "train-detect");
  const auto m = manifest_value<std::size_t>(archive, "input_size");
  if (m == 0 || m % 2 != 0) throw ShapeMismatchError("autoencoder input size must be even");
  detect::Autoencoder ae(load_matrix(archive, "encoder.weights", m / 2, m),
                         load_vector(archive, "encoder.bias", m / 2),
                         load_matrix(archive, "decoder.weights", m, m / 2),
                         load_vector(archive, "decoder.bias", m));
  return {std::move(ae), manifest_value<double>(archive, "threshold")};
}

}  // namespace ood::pipeline
