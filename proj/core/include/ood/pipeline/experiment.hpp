// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ood/baselines/features.hpp"
#include "ood/corpus/corpus.hpp"
#include "ood/detect/autoencoder.hpp"
#include "ood/detect/evaluation.hpp"
#include "ood/embed/classifier.hpp"
#include "ood/pipeline/config.hpp"
#include "ood/pipeline/models.hpp"

namespace ood::pipeline {

/// Sentences of one experiment. `fit` trains every model, `validation`
/// (held out of the training split) drives early stopping and the deployment
/// threshold, the test sets are only scored.
struct ExperimentData {
  std::vector<corpus::LabeledSentence> fit;
  std::vector<corpus::LabeledSentence> validation;
  std::vector<corpus::LabeledSentence> test_id;
  std::vector<corpus::LabeledSentence> test_ood;
  std::vector<corpus::Tokens> pretrain_text;
};

/// 80/20 train/test split of the ID sentences, then `validation_percent` of
/// the training part is held out, both stratified by domain and seeded.
ExperimentData make_experiment_data(std::span<const corpus::LabeledSentence> id,
                                    std::span<const corpus::LabeledSentence> ood,
                                    std::vector<corpus::Tokens> pretrain_text,
                                    unsigned validation_percent, std::uint64_t seed);

/// Reads the corpora named by `config`. The OOD file is read only when
/// `with_ood` is set; training stages never touch it.
ExperimentData load_experiment_data(const PipelineConfig& config, bool with_ood);

/// Throws std::invalid_argument when any sentence is marked OOD.
void require_in_domain(std::span<const corpus::LabeledSentence> sentences,
                       std::string_view stage);

/// Vocabulary over the pre-training text (min count from config) extended
/// with every fit-split token, and skip-gram vectors trained on the
/// pre-training text (or the fit split when there is none).
WordVectors pretrain_word_vectors(const ExperimentData& data, const PipelineConfig& config);

TrainedClassifier train_embedder(const ExperimentData& data, const WordVectors& vectors,
                                 const PipelineConfig& config,
                                 embed::TrainingReport* report = nullptr);

detect::AutoencoderConfig autoencoder_config(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Representations and detectors of the comparison grid.

struct RepresentationSpec {
  enum class Kind { bow, tfidf, neural_bow, supervised } kind = Kind::supervised;
  std::size_t n_max = 1;
  embed::CellKind cell = embed::CellKind::lstm;
  embed::EmbeddingMode mode = embed::EmbeddingMode::two_channel;

  /// bow-N, tfidf-N (N in 1..3), nbow, dc-lstm-<mode>, dc-rnn-<mode>.
  static RepresentationSpec parse(std::string_view name);
  std::string name() const;
};

enum class DetectorKind { autoencoder, nearest_neighbor, cbc, idv };

/// ae, nnd, cbc, idv.
DetectorKind parse_detector(std::string_view name);
std::string to_string(DetectorKind kind);

/// Feature vectors of every split. Supervised and neural-BoW features are
/// signed dense vectors; n-gram features are nonnegative and sparse.
struct FeatureSet {
  std::size_t width = 0;
  bool nonnegative = false;
  std::vector<baselines::SparseVector> fit;
  std::vector<baselines::SparseVector> validation;
  std::vector<baselines::SparseVector> test_id;
  std::vector<baselines::SparseVector> test_ood;
};

/// Features for a non-supervised representation. `max_features` caps the
/// n-gram index (0: no cap).
FeatureSet compute_features(const RepresentationSpec& spec, const ExperimentData& data,
                            const WordVectors& vectors, std::size_t max_features = 0);

/// Dropout-free sentence representations from a trained embedder.
FeatureSet supervised_features(const TrainedClassifier& model, const ExperimentData& data);

struct DetectionScores {
  std::vector<double> id;   // higher means more OOD-like
  std::vector<double> ood;
};

/// Trains `kind` on the fit features and scores both test sets. CBC and IDV
/// score by negated confidence so every detector ranks OOD sentences high.
DetectionScores score_detector(DetectorKind kind, const FeatureSet& features,
                               const ExperimentData& data, const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Evaluation reports.

struct LengthGroup {
  std::size_t min_length;
  std::size_t max_length;
};

/// 1-8, 9-11, 12-22 and 23-64 tokens.
std::span<const LengthGroup> length_groups();

struct LengthGroupResult {
  LengthGroup group;
  std::size_t id_count = 0;
  std::size_t ood_count = 0;
  std::optional<double> eer;  // absent when either side is empty
};

struct EvalReport {
  std::string method;
  detect::ErrorRateCurve curve;
  std::vector<double> id_scores;
  std::vector<double> ood_scores;
  std::vector<std::size_t> id_lengths;
  std::vector<std::size_t> ood_lengths;
  std::optional<double> domain_accuracy;
  std::optional<double> threshold;  // deployment threshold, when a detector provides one
};

EvalReport make_report(std::string method, const ExperimentData& data, DetectionScores scores);
std::vector<LengthGroupResult> length_group_results(const EvalReport& report);

/// EER over the sentences whose length lies in [min_length, max_length].
std::optional<double> eer_for_lengths(const EvalReport& report, std::size_t min_length,
                                      std::size_t max_length);

void write_summary(std::ostream& out, const EvalReport& report);
void write_length_groups_csv(std::ostream& out, const EvalReport& report);
void write_scores_csv(std::ostream& out, const EvalReport& report);

/// Shortest round-trip decimal text of a double.
std::string format_number(double value);

// ---------------------------------------------------------------------------
// Whole experiments.

struct PipelineResult {
  WordVectors vectors;
  TrainedClassifier embedder;
  TrainedDetector detector;
  embed::TrainingReport training;
  detect::AutoencoderReport autoencoder_training;
  FeatureSet features;
  EvalReport report;
};

/// Pre-training, embedder, autoencoder on fit representations, deployment
/// threshold on validation representations, evaluation on the test sets.
PipelineResult run_supervised_pipeline(const ExperimentData& data, const PipelineConfig& config);

struct SweepRow {
  std::size_t domains = 0;
  double eer = 0.0;
  double domain_accuracy = 0.0;
};

/// Re-runs the supervised pipeline on the first |D| = 2..max domains
/// (sorted label order).
std::vector<SweepRow> domain_sweep(std::span<const corpus::LabeledSentence> id,
                                   std::span<const corpus::LabeledSentence> ood,
                                   const std::vector<corpus::Tokens>& pretrain_text,
                                   const PipelineConfig& config);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

struct GridCell {
  std::string representation;
  std::string detector;
  double eer = 0.0;
};

/// Every (representation, detector) pair. Representations are processed by
/// up to config.threads workers; output order and values do not depend on
/// the thread count.
std::vector<GridCell> run_grid(const ExperimentData& data, const WordVectors& vectors,
                               const PipelineConfig& config,
                               std::span<const std::string> representations,
                               std::span<const std::string> detectors);
/// One row per cell, then `bow-best` and `tfidf-best` rows holding the lowest
/// EER over n for each detector.
void write_grid_csv(std::ostream& out, std::span<const GridCell> cells);

std::vector<std::string> default_grid_representations();
std::vector<std::string> default_grid_detectors();

}  // namespace ood::pipeline
