// SPDX-License-Identifier: Apache-2.0
#include "ood/pipeline/config.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace ood::pipeline {

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "id_corpus",          "ood_corpus",         "pretrain_corpus",      "model_dir",
    "report_dir",         "seed",               "dim",                  "window",
    "negatives",          "pretrain_epochs",    "pretrain_learning_rate", "pretrain_min_count",
    "mode",               "cell",               "hidden",               "embed_optimizer",
    "embed_max_epochs",   "embed_min_epochs",   "embed_patience",       "batch_size",
    "dropout",            "validation_percent", "detect_optimizer",     "detect_max_epochs",
    "detect_patience",    "threshold_quantile", "n_max",                "ae_max_features",
    "baseline",           "grid_representations", "grid_classifiers",   "threads",
};

std::size_t get_count(const util::KeyValueConfig& c, std::string_view key, std::size_t fallback) {
  const auto v = c.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw util::ConfigError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename F>
auto translate(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const std::invalid_argument& e) {
    throw util::ConfigError(key + ": " + e.what());
  }
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// 64-bit FNV-1a; stable across platforms and runs.
struct Digest {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  void add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state ^= c;
      state *= 0x100000001b3ULL;
    }
  }
  void add_file(const std::filesystem::path& path) {
    if (path.empty()) return;
    std::ifstream in(path, std::ios::binary);
    if (!in) return;  // missing inputs are reported by the stage itself
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    add(data);
  }
  std::string hex() const {
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(state));
    return buf.data();
  }
};

}  // namespace

PipelineConfig PipelineConfig::from_config(const util::KeyValueConfig& c,
                                           const std::filesystem::path& base) {
  c.reject_unknown(kKnownKeys);
  if (!c.has("seed")) throw util::ConfigError("seed is mandatory");
  PipelineConfig p;
  p.id_corpus = resolve(base, c.get("id_corpus", ""));
  p.ood_corpus = resolve(base, c.get("ood_corpus", ""));
  p.pretrain_corpus = resolve(base, c.get("pretrain_corpus", ""));
  p.model_dir = resolve(base, c.get("model_dir", "models"));
  p.report_dir = resolve(base, c.get("report_dir", "reports"));
  p.seed = c.get_u64("seed", 0);
  p.dim = get_count(c, "dim", p.dim);
  p.window = get_count(c, "window", p.window);
  p.negatives = get_count(c, "negatives", p.negatives);
  p.pretrain_epochs = get_count(c, "pretrain_epochs", p.pretrain_epochs);
  p.pretrain_learning_rate = c.get_double("pretrain_learning_rate", p.pretrain_learning_rate);
  p.pretrain_min_count = get_count(c, "pretrain_min_count", p.pretrain_min_count);
  if (c.has("mode"))
    p.mode = translate("mode", [&] { return embed::parse_embedding_mode(c.require("mode")); });
  if (c.has("cell"))
    p.cell = translate("cell", [&] { return embed::parse_cell_kind(c.require("cell")); });
  p.hidden = get_count(c, "hidden", p.hidden);
  if (c.has("embed_optimizer"))
    p.embed_optimizer = translate("embed_optimizer",
                                  [&] { return math::parse_optimizer(c.require("embed_optimizer")); });
  p.embed_max_epochs = get_count(c, "embed_max_epochs", p.embed_max_epochs);
  p.embed_min_epochs = get_count(c, "embed_min_epochs", p.embed_min_epochs);
  p.embed_patience = get_count(c, "embed_patience", p.embed_patience);
  p.batch_size = get_count(c, "batch_size", p.batch_size);
  p.dropout = c.get_double("dropout", p.dropout);
  p.validation_percent = static_cast<unsigned>(get_count(c, "validation_percent", p.validation_percent));
  if (c.has("detect_optimizer"))
    p.detect_optimizer = translate("detect_optimizer",
                                   [&] { return math::parse_optimizer(c.require("detect_optimizer")); });
  p.detect_max_epochs = get_count(c, "detect_max_epochs", p.detect_max_epochs);
  p.detect_patience = get_count(c, "detect_patience", p.detect_patience);
  p.threshold_quantile = c.get_double("threshold_quantile", p.threshold_quantile);
  p.n_max = get_count(c, "n_max", p.n_max);
  p.ae_max_features = get_count(c, "ae_max_features", p.ae_max_features);
  p.baseline = c.get("baseline", "");
  p.grid_representations = split_list(c.get("grid_representations", ""));
  p.grid_classifiers = split_list(c.get("grid_classifiers", ""));
  p.threads = get_count(c, "threads", p.threads);
  p.validate();
  return p;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return from_config(util::KeyValueConfig::load(path), path.parent_path());
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw util::ConfigError(m); };
  if (dim == 0) fail("dim must be positive");
  if (window == 0) fail("window must be positive");
  if (pretrain_epochs == 0) fail("pretrain_epochs must be positive");
  if (!(pretrain_learning_rate > 0.0)) fail("pretrain_learning_rate must be positive");
  if (hidden == 0) fail("hidden must be positive");
  if (embed_max_epochs == 0) fail("embed_max_epochs must be positive");
  if (embed_min_epochs > embed_max_epochs) fail("embed_min_epochs exceeds embed_max_epochs");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (validation_percent == 0 || validation_percent >= 100)
    fail("validation_percent must lie in 1..99");
  if (detect_max_epochs == 0) fail("detect_max_epochs must be positive");
  if (!(threshold_quantile > 0.0 && threshold_quantile <= 1.0))
    fail("threshold_quantile must lie in (0, 1]");
  if (n_max < 1 || n_max > 3) fail("n_max must be 1, 2 or 3");
  if (ae_max_features < 2) fail("ae_max_features must be at least 2");
  if (threads == 0) fail("threads must be positive");
}

util::KeyValueConfig PipelineConfig::to_config() const {
  util::KeyValueConfig c;
  c.set("id_corpus", id_corpus.string());
  c.set("ood_corpus", ood_corpus.string());
  c.set("pretrain_corpus", pretrain_corpus.string());
  c.set("model_dir", model_dir.string());
  c.set("report_dir", report_dir.string());
  c.set("seed", std::to_string(seed));
  c.set("dim", std::to_string(dim));
  c.set("window", std::to_string(window));
  c.set("negatives", std::to_string(negatives));
  c.set("pretrain_epochs", std::to_string(pretrain_epochs));
  c.set("pretrain_learning_rate", number(pretrain_learning_rate));
  c.set("pretrain_min_count", std::to_string(pretrain_min_count));
  c.set("mode", embed::to_string(mode));
  c.set("cell", embed::to_string(cell));
  c.set("hidden", std::to_string(hidden));
  c.set("embed_optimizer", math::to_string(embed_optimizer));
  c.set("embed_max_epochs", std::to_string(embed_max_epochs));
  c.set("embed_min_epochs", std::to_string(embed_min_epochs));
  c.set("embed_patience", std::to_string(embed_patience));
  c.set("batch_size", std::to_string(batch_size));
  c.set("dropout", number(dropout));
  c.set("validation_percent", std::to_string(validation_percent));
  c.set("detect_optimizer", math::to_string(detect_optimizer));
  c.set("detect_max_epochs", std::to_string(detect_max_epochs));
  c.set("detect_patience", std::to_string(detect_patience));
  c.set("threshold_quantile", number(threshold_quantile));
  c.set("n_max", std::to_string(n_max));
  c.set("ae_max_features", std::to_string(ae_max_features));
  c.set("baseline", baseline);
  c.set("grid_representations", join_list(grid_representations));
  c.set("grid_classifiers", join_list(grid_classifiers));
  c.set("threads", std::to_string(threads));
  return c;
}

embed::ClassifierConfig PipelineConfig::classifier_config() const {
  embed::ClassifierConfig c;
  c.cell = cell;
  c.mode = mode;
  c.hidden = hidden;
  c.dropout = dropout;
  c.optimizer = math::OptimizerConfig::defaults(embed_optimizer);
  c.max_epochs = embed_max_epochs;
  c.min_epochs = embed_min_epochs;
  c.patience = embed_patience;
  c.batch_size = batch_size;
  c.seed = seed;
  return c;
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::pretrain: return "pretrain";
    case Stage::train_embed: return "train-embed";
    case Stage::embed: return "embed";
    case Stage::train_detect: return "train-detect";
  }
  return "unknown";
}

std::string stage_digest(const PipelineConfig& config, Stage stage) {
  static const std::vector<std::vector<std::string>> kStageKeys = {
      {"seed", "dim", "window", "negatives", "pretrain_epochs", "pretrain_learning_rate",
       "pretrain_min_count", "validation_percent"},
      {"mode", "cell", "hidden", "embed_optimizer", "embed_max_epochs", "embed_min_epochs",
       "embed_patience", "batch_size", "dropout"},
      {},
      {"detect_optimizer", "detect_max_epochs", "detect_patience", "threshold_quantile"},
  };
  const auto echo = config.to_config();
  Digest d;
  d.add_file(config.id_corpus);
  d.add_file(config.pretrain_corpus);
  for (std::size_t s = 0; s <= static_cast<std::size_t>(stage); ++s)
    for (const auto& key : kStageKeys[s]) {
      d.add(key);
      d.add("=");
      d.add(echo.get(key, ""));
      d.add("\n");
    }
  return d.hex();
}

std::filesystem::path artifact_path(const PipelineConfig& config, Stage stage) {
  return config.model_dir / (to_string(stage) + "-" + stage_digest(config, stage) + ".oodm");
}

}  // namespace ood::pipeline
