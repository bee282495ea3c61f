// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ood/embed/classifier.hpp"
#include "ood/embed/embedding.hpp"
#include "ood/embed/recurrent.hpp"
#include "ood/math/optimizer.hpp"
#include "ood/util/key_value.hpp"

namespace ood::pipeline {

/// Every setting of an experiment run. Loaded from a flat `key = value` file;
/// relative paths resolve against the directory of that file.
struct PipelineConfig {
  std::filesystem::path id_corpus;        // labeled ID sentences (label<TAB>text)
  std::filesystem::path ood_corpus;       // unlabeled OOD sentences, used by eval only
  std::filesystem::path pretrain_corpus;  // optional unlabeled pre-training text
  std::filesystem::path model_dir = "models";
  std::filesystem::path report_dir = "reports";

  std::uint64_t seed = 0;  // mandatory in files

  // word vectors
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t pretrain_epochs = 5;
  double pretrain_learning_rate = 0.05;
  std::size_t pretrain_min_count = 2;

  // sentence embedder
  embed::EmbeddingMode mode = embed::EmbeddingMode::two_channel;
  embed::CellKind cell = embed::CellKind::lstm;
  std::size_t hidden = 100;
  math::OptimizerKind embed_optimizer = math::OptimizerKind::adam;
  std::size_t embed_max_epochs = 20;
  std::size_t embed_min_epochs = 10;
  std::size_t embed_patience = 3;
  std::size_t batch_size = 16;
  double dropout = 0.5;
  unsigned validation_percent = 10;  // share of the training split held out

  // detector
  math::OptimizerKind detect_optimizer = math::OptimizerKind::adam;
  std::size_t detect_max_epochs = 100;
  std::size_t detect_patience = 10;
  double threshold_quantile = 0.95;

  // baselines and grid
  std::size_t n_max = 1;
  std::size_t ae_max_features = 256;  // n-gram columns fed to the autoencoder
  std::string baseline;               // empty: the DC + autoencoder pipeline
  std::vector<std::string> grid_representations;
  std::vector<std::string> grid_classifiers;
  std::size_t threads = 1;

  /// Throws util::ConfigError for unknown keys, bad values or a missing seed.
  static PipelineConfig from_config(const util::KeyValueConfig& config,
                                    const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);
  /// Echo of every setting, paths as given.
  util::KeyValueConfig to_config() const;

  /// Throws util::ConfigError on an out-of-range value.
  void validate() const;

  embed::ClassifierConfig classifier_config() const;
};

enum class Stage { pretrain, train_embed, embed, train_detect };

std::string to_string(Stage stage);

/// Hex digest of the settings (and input file contents) that determine a
/// stage's output, including all upstream stages.
std::string stage_digest(const PipelineConfig& config, Stage stage);

/// model_dir / "<stage>-<digest>.oodm".
std::filesystem::path artifact_path(const PipelineConfig& config, Stage stage);

}  // namespace ood::pipeline
