// SPDX-License-Identifier: Apache-2.0
#include "ood/pipeline/stages.hpp"

#include <fstream>

#include "ood/pipeline/archive.hpp"
#include "ood/pipeline/models.hpp"
#include "ood/util/log.hpp"

namespace ood::pipeline {

MissingArtifactError::MissingArtifactError(Stage missing, const std::filesystem::path& path)
    : std::runtime_error("missing " + to_string(missing) + " artifact " + path.string() +
                         ": run the `" + to_string(missing) + "` stage with this config first"),
      stage_(missing) {}

namespace {

ModelArchive load_stage(const PipelineConfig& config, Stage stage) {
  const auto path = artifact_path(config, stage);
  if (!std::filesystem::exists(path)) throw MissingArtifactError(stage, path);
  return load_archive(path);
}

std::filesystem::path save_stage(const PipelineConfig& config, Stage stage,
                                 const ModelArchive& archive) {
  const auto path = artifact_path(config, stage);
  save_archive(path, archive);
  util::log_info("wrote " + path.string());
  return path;
}

std::ofstream open_report(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

DetectionScores reconstruction_scores(const FeatureSet& features, const detect::Autoencoder& ae) {
  DetectionScores scores;
  for (const auto& x : features.test_id) scores.id.push_back(ae.score(x.to_dense(features.width)));
  for (const auto& x : features.test_ood)
    scores.ood.push_back(ae.score(x.to_dense(features.width)));
  return scores;
}

EvalReport evaluate_baseline(const PipelineConfig& config, const ExperimentData& data) {
  const auto plus = config.baseline.find('+');
  if (plus == std::string::npos)
    throw util::ConfigError("baseline must read <representation>+<detector>, got " +
                            config.baseline);
  const auto rep = config.baseline.substr(0, plus);
  DetectorKind kind;
  try {
    kind = parse_detector(config.baseline.substr(plus + 1));
  } catch (const std::invalid_argument& e) {
    throw util::ConfigError(e.what());
  }

  const auto vectors = word_vectors_from(load_stage(config, Stage::pretrain));
  std::optional<FeatureSet> features;
  std::optional<double> accuracy;
  if (rep == "dc") {
    const auto trained = classifier_from(load_stage(config, Stage::train_embed));
    features = supervised_features(trained, data);
    accuracy = embed::domain_accuracy(trained.classifier, trained.vocab, data.test_id);
  } else {
    RepresentationSpec spec;
    try {
      spec = RepresentationSpec::parse(rep);
    } catch (const std::invalid_argument& e) {
      throw util::ConfigError(e.what());
    }
    if (spec.kind == RepresentationSpec::Kind::supervised) {
      auto cfg = config;
      cfg.cell = spec.cell;
      cfg.mode = spec.mode;
      const auto trained = train_embedder(data, vectors, cfg);
      features = supervised_features(trained, data);
      accuracy = embed::domain_accuracy(trained.classifier, trained.vocab, data.test_id);
    } else {
      const bool capped = kind == DetectorKind::autoencoder &&
                          spec.kind != RepresentationSpec::Kind::neural_bow;
      features = compute_features(spec, data, vectors, capped ? config.ae_max_features : 0);
    }
  }
  auto report = make_report(config.baseline, data, score_detector(kind, *features, data, config));
  report.domain_accuracy = accuracy;
  return report;
}

}  // namespace

std::filesystem::path run_pretrain_stage(const PipelineConfig& config) {
  const auto data = load_experiment_data(config, false);
  const auto vectors = pretrain_word_vectors(data, config);
  return save_stage(config, Stage::pretrain, to_archive(vectors, config.to_config()));
}

std::filesystem::path run_train_embed_stage(const PipelineConfig& config) {
  const auto vectors = word_vectors_from(load_stage(config, Stage::pretrain));
  const auto data = load_experiment_data(config, false);
  embed::TrainingReport report;
  const auto trained = train_embedder(data, vectors, config, &report);
  for (const auto& e : report.epochs)
    util::log_info("epoch " + std::to_string(e.epoch) + " loss=" + format_number(e.train_loss) +
                   " validation_accuracy=" + format_number(e.validation_accuracy));
  return save_stage(config, Stage::train_embed, to_archive(trained, config.to_config()));
}

std::filesystem::path run_embed_stage(const PipelineConfig& config) {
  const auto trained = classifier_from(load_stage(config, Stage::train_embed));
  const auto data = load_experiment_data(config, false);
  Representations reps;
  for (const auto& s : data.fit)
    reps.fit.push_back(embed::embed_sentence(trained.vocab.encode(s.tokens), trained.classifier).values);
  for (const auto& s : data.validation)
    reps.validation.push_back(
        embed::embed_sentence(trained.vocab.encode(s.tokens), trained.classifier).values);
  return save_stage(config, Stage::embed, to_archive(reps, config.to_config()));
}

std::filesystem::path run_train_detect_stage(const PipelineConfig& config) {
  const auto reps = representations_from(load_stage(config, Stage::embed));
  if (reps.fit.empty() || reps.validation.empty())
    throw std::invalid_argument("train-detect: the embed artifact holds no representations");
  auto ae = detect::train_autoencoder(reps.fit, autoencoder_config(config));
  std::vector<double> validation_scores;
  for (const auto& r : reps.validation) validation_scores.push_back(ae.score(r));
  const double threshold =
      detect::deployment_threshold(validation_scores, config.threshold_quantile);
  return save_stage(config, Stage::train_detect,
                    to_archive(TrainedDetector{std::move(ae), threshold}, config.to_config()));
}

EvalOutputs run_eval_stage(const PipelineConfig& config) {
  const auto data = load_experiment_data(config, true);
  EvalOutputs out;
  if (!config.baseline.empty()) {
    out.report = evaluate_baseline(config, data);
  } else {
    const auto trained = classifier_from(load_stage(config, Stage::train_embed));
    const auto detector = detector_from(load_stage(config, Stage::train_detect));
    const auto features = supervised_features(trained, data);
    RepresentationSpec spec;
    spec.cell = config.cell;
    spec.mode = config.mode;
    out.report = make_report(spec.name() + "+ae", data,
                             reconstruction_scores(features, detector.autoencoder));
    out.report.domain_accuracy =
        embed::domain_accuracy(trained.classifier, trained.vocab, data.test_id);
    out.report.threshold = detector.threshold;
  }

  const auto& dir = config.report_dir;
  auto write = [&](const char* name, auto&& writer) {
    const auto path = dir / name;
    auto stream = open_report(path);
    writer(stream);
    out.files.push_back(path);
  };
  write("curve.csv", [&](std::ostream& s) { detect::write_curve_csv(s, out.report.curve); });
  write("scores.csv", [&](std::ostream& s) { write_scores_csv(s, out.report); });
  write("length_groups.csv", [&](std::ostream& s) { write_length_groups_csv(s, out.report); });
  write("summary.txt", [&](std::ostream& s) { write_summary(s, out.report); });
  return out;
}

std::filesystem::path run_domain_sweep(const PipelineConfig& config) {
  if (config.id_corpus.empty() || config.ood_corpus.empty())
    throw util::ConfigError("domain sweep needs id_corpus and ood_corpus");
  const auto id = corpus::read_labeled(config.id_corpus);
  const auto ood = corpus::read_unlabeled(config.ood_corpus, corpus::Origin::out_of_domain);
  std::vector<corpus::Tokens> pretrain;
  if (!config.pretrain_corpus.empty())
    for (auto& s : corpus::read_unlabeled(config.pretrain_corpus, corpus::Origin::in_domain))
      pretrain.push_back(std::move(s.tokens));
  const auto rows = domain_sweep(id, ood, pretrain, config);
  const auto path = config.report_dir / "domain_sweep.csv";
  auto out = open_report(path);
  write_sweep_csv(out, rows);
  return path;
}

std::filesystem::path run_grid_stage(const PipelineConfig& config) {
  const auto data = load_experiment_data(config, true);
  const auto vectors = word_vectors_from(load_stage(config, Stage::pretrain));
  const auto reps = config.grid_representations.empty() ? default_grid_representations()
                                                        : config.grid_representations;
  const auto dets =
      config.grid_classifiers.empty() ? default_grid_detectors() : config.grid_classifiers;
  std::vector<GridCell> cells;
  try {
    cells = run_grid(data, vectors, config, reps, dets);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind("unknown", 0) == 0 || what.rfind("representation", 0) == 0)
      throw util::ConfigError(what);
    throw;
  }
  const auto path = config.report_dir / "grid.csv";
  auto out = open_report(path);
  write_grid_csv(out, cells);
  return path;
}

}  // namespace ood::pipeline
