// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ood/pipeline/config.hpp"
#include "ood/pipeline/experiment.hpp"

namespace ood::pipeline {

/// A stage was started before the stage it depends on produced its artifact.
class MissingArtifactError : public std::runtime_error {
 public:
  MissingArtifactError(Stage missing, const std::filesystem::path& path);
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

// File-based stages. Each loads its predecessor's artifact (content-named by
// the settings that produced it) and writes its own; the returned path names
// the written artifact.
std::filesystem::path run_pretrain_stage(const PipelineConfig& config);
std::filesystem::path run_train_embed_stage(const PipelineConfig& config);
std::filesystem::path run_embed_stage(const PipelineConfig& config);
std::filesystem::path run_train_detect_stage(const PipelineConfig& config);

struct EvalOutputs {
  EvalReport report;
  std::vector<std::filesystem::path> files;
};

/// Scores the test splits and writes curve.csv, scores.csv,
/// length_groups.csv and summary.txt under report_dir. With a baseline set
/// (`<representation>+<detector>`) the baseline is evaluated instead; the
/// representation `dc` reuses the trained embedder artifact.
EvalOutputs run_eval_stage(const PipelineConfig& config);

/// Domain-count sweep written to report_dir/domain_sweep.csv.
std::filesystem::path run_domain_sweep(const PipelineConfig& config);

/// Representation x classifier table written to report_dir/grid.csv.
std::filesystem::path run_grid_stage(const PipelineConfig& config);

}  // namespace ood::pipeline
