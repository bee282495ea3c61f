// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "ood/corpus/corpus.hpp"
#include "ood/detect/autoencoder.hpp"
#include "ood/embed/classifier.hpp"
#include "ood/math/embedding_matrix.hpp"
#include "ood/pipeline/archive.hpp"
#include "ood/util/key_value.hpp"

namespace ood::pipeline {

// Conversions between trained models and archives. Each archive records its
// stage name in the manifest; loading an archive of another stage is a
// shape-mismatch error. `config_echo` is stored verbatim for auditing.

struct WordVectors {
  corpus::Vocabulary vocab;
  math::EmbeddingMatrix vectors;  // v x k
};

ModelArchive to_archive(const WordVectors& model, const util::KeyValueConfig& config_echo);
WordVectors word_vectors_from(const ModelArchive& archive);

struct TrainedClassifier {
  corpus::Vocabulary vocab;
  embed::BiLstmClassifier classifier;
};

ModelArchive to_archive(const TrainedClassifier& model, const util::KeyValueConfig& config_echo);
TrainedClassifier classifier_from(const ModelArchive& archive);

/// Sentence representations of the fit and validation splits.
struct Representations {
  std::vector<math::VectorD> fit;
  std::vector<math::VectorD> validation;
};

ModelArchive to_archive(const Representations& reps, const util::KeyValueConfig& config_echo);
Representations representations_from(const ModelArchive& archive);

struct TrainedDetector {
  detect::Autoencoder autoencoder;
  double threshold = 0.0;  // deployment threshold from ID validation scores
};

ModelArchive to_archive(const TrainedDetector& model, const util::KeyValueConfig& config_echo);
TrainedDetector detector_from(const ModelArchive& archive);

/// Stage name recorded in an archive manifest.
std::string archive_stage(const ModelArchive& archive);

}  // namespace ood::pipeline
