// SPDX-License-Identifier: Apache-2.0
// oodctl: command-line driver for the OOD sentence detection pipeline.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ood/corpus/corpus.hpp"
#include "ood/corpus/synthetic.hpp"
#include "ood/embed/classifier.hpp"
#include "ood/pipeline/archive.hpp"
#include "ood/pipeline/config.hpp"
#include "ood/pipeline/experiment.hpp"
#include "ood/pipeline/stages.hpp"
#include "ood/util/key_value.hpp"
#include "ood/util/log.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ood;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kMissingArtifact = 3,
  kNumericFailure = 4,
};

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> cell;
  std::optional<std::size_t> hidden;
  std::optional<std::string> optimizer;
  std::optional<std::string> baseline;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  bool verbose = false;
};

void add_common(CLI::App& cmd, Overrides& o, bool needs_config) {
  auto* opt = cmd.add_option("--config", o.config, "pipeline config file (key = value)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd.add_option("--seed", o.seed, "random seed (overrides the config)");
  cmd.add_flag("-v,--verbose", o.verbose, "log progress to stderr");
}

void add_model_flags(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--mode", o.mode, "embedding mode")
      ->check(CLI::IsMember({"random", "static", "non-static", "two-channel"}));
  cmd.add_option("--cell", o.cell, "recurrent cell")->check(CLI::IsMember({"lstm", "rnn"}));
  cmd.add_option("--hidden", o.hidden, "hidden size")->check(CLI::IsMember({100, 150}));
  cmd.add_option("--optimizer", o.optimizer, "optimizer for both training stages")
      ->check(CLI::IsMember({"adam", "adadelta", "rmsprop"}));
}

pipeline::PipelineConfig resolve_config(const Overrides& o, bool out_is_model_dir) {
  auto kv = util::KeyValueConfig::load(o.config);
  if (o.seed) kv.set("seed", std::to_string(*o.seed));
  if (o.mode) kv.set("mode", *o.mode);
  if (o.cell) kv.set("cell", *o.cell);
  if (o.hidden) kv.set("hidden", std::to_string(*o.hidden));
  if (o.optimizer) {
    kv.set("embed_optimizer", *o.optimizer);
    kv.set("detect_optimizer", *o.optimizer);
  }
  if (o.baseline) kv.set("baseline", *o.baseline);
  if (o.threads) kv.set("threads", std::to_string(*o.threads));
  auto config = pipeline::PipelineConfig::from_config(kv, fs::path(o.config).parent_path());
  if (o.out) (out_is_model_dir ? config.model_dir : config.report_dir) = *o.out;
  return config;
}

int run_synth(const Overrides& o, bool long_variant) {
  corpus::SyntheticSpec spec =
      long_variant ? corpus::SyntheticSpec::long_sentences() : corpus::SyntheticSpec{};
  if (!o.config.empty())
    spec = corpus::SyntheticSpec::from_config(util::KeyValueConfig::load(o.config), spec);
  if (o.seed) spec.seed = *o.seed;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw util::ConfigError(e.what());
  }
  const fs::path dir = o.out.value_or("synthetic");
  fs::create_directories(dir);
  const auto bench = corpus::synthesize_benchmark(spec);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("id.tsv");
    corpus::write_labeled(f, bench.id);
  }
  {
    auto f = open("ood.txt");
    corpus::write_unlabeled(f, bench.ood);
  }
  {
    auto f = open("pretrain.txt");
    corpus::write_unlabeled(f, bench.background);
  }
  {
    auto f = open("synth.conf");
    const auto echo = spec.to_config();
    for (const auto& [k, v] : echo.values()) f << k << " = " << v << '\n';
  }
  {
    auto f = open("pipeline.conf");
    f << "# Generated by oodctl synth. Paths are relative to this file.\n"
      << "seed = " << spec.seed << '\n'
      << "id_corpus = id.tsv\n"
      << "ood_corpus = ood.txt\n"
      << "pretrain_corpus = pretrain.txt\n"
      << "model_dir = models\n"
      << "report_dir = reports\n";
  }
  std::cout << "wrote " << bench.id.size() << " ID, " << bench.ood.size() << " OOD and "
            << bench.background.size() << " pre-training sentences to " << dir.string() << '\n';
  return kOk;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Out-of-domain sentence detection with supervised sentence embeddings"};
  app.require_subcommand(1);

  Overrides o;
  bool long_variant = false;
  bool sweep = false;

  auto* synth = app.add_subcommand("synth", "generate the synthetic multi-domain benchmark");
  add_common(*synth, o, false);
  synth->add_option("--out", o.out, "output directory (default: synthetic)");
  synth->add_flag("--long", long_variant, "long-sentence variant (20-40 tokens, keyword ratio 0.3)");

  auto* pretrain = app.add_subcommand("pretrain", "train skip-gram word vectors");
  auto* train_embed = app.add_subcommand("train-embed", "train the domain-category embedder");
  auto* embed_cmd = app.add_subcommand("embed", "compute sentence representations");
  auto* train_detect = app.add_subcommand("train-detect", "train the autoencoder detector");
  for (auto* cmd : {pretrain, train_embed, embed_cmd, train_detect}) {
    add_common(*cmd, o, true);
    add_model_flags(*cmd, o);
    cmd->add_option("--out", o.out, "model directory (overrides model_dir)");
  }

  auto* eval = app.add_subcommand("eval", "evaluate on the test splits and write reports");
  add_common(*eval, o, true);
  add_model_flags(*eval, o);
  eval->add_option("--baseline", o.baseline, "evaluate <representation>+<detector> instead");
  eval->add_option("--out", o.out, "report directory (overrides report_dir)");
  eval->add_flag("--domain-sweep", sweep, "re-run the pipeline for |D| = 2..max");

  auto* grid = app.add_subcommand("grid", "representation x classifier EER table");
  add_common(*grid, o, true);
  add_model_flags(*grid, o);
  grid->add_option("--out", o.out, "report directory (overrides report_dir)");
  grid->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  util::set_log_level(o.verbose ? util::LogLevel::info : util::LogLevel::warning);

  if (synth->parsed()) return run_synth(o, long_variant);
  if (pretrain->parsed()) {
    std::cout << pipeline::run_pretrain_stage(resolve_config(o, true)).string() << '\n';
  } else if (train_embed->parsed()) {
    std::cout << pipeline::run_train_embed_stage(resolve_config(o, true)).string() << '\n';
  } else if (embed_cmd->parsed()) {
    std::cout << pipeline::run_embed_stage(resolve_config(o, true)).string() << '\n';
  } else if (train_detect->parsed()) {
    std::cout << pipeline::run_train_detect_stage(resolve_config(o, true)).string() << '\n';
  } else if (eval->parsed()) {
    const auto config = resolve_config(o, false);
    if (sweep) {
      std::cout << pipeline::run_domain_sweep(config).string() << '\n';
    } else {
      const auto out = pipeline::run_eval_stage(config);
      pipeline::write_summary(std::cout, out.report);
    }
  } else if (grid->parsed()) {
    std::cout << pipeline::run_grid_stage(resolve_config(o, false)).string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const pipeline::MissingArtifactError& e) {
    std::cerr << "oodctl: " << e.what() << '\n';
    return kMissingArtifact;
  } catch (const embed::NumericError& e) {
    std::cerr << "oodctl: numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const util::ConfigError& e) {
    std::cerr << "oodctl: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const corpus::CorpusFormatError& e) {
    std::cerr << "oodctl: input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pipeline::ArchiveError& e) {
    std::cerr << "oodctl: archive error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "oodctl: " << e.what() << '\n';
    return kFailure;
  }
}
