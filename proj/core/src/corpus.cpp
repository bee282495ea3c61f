// SPDX-License-Identifier: Apache-2.0
#include "ood/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

#include "ood/math/rng.hpp"
#include "ood/util/log.hpp"

namespace ood::corpus {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_edge_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::size_t lo = i;
      std::size_t hi = j;
      while (lo < hi && is_edge_punct(static_cast<unsigned char>(text[lo]))) ++lo;
      while (hi > lo && is_edge_punct(static_cast<unsigned char>(text[hi - 1]))) --hi;
      if (hi > lo) {
        std::string token(text.substr(lo, hi - lo));
        for (char& c : token)
          if (static_cast<unsigned char>(c) < 0x80)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        tokens.push_back(std::move(token));
      }
    }
    i = j;
  }
  if (tokens.empty()) throw std::invalid_argument("tokenize: empty sentence");
  return tokens;
}

// --- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary() { add(std::string(kUnkToken)); }

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kUnkToken)
    throw std::invalid_argument("vocabulary must start with the UNK token");
  for (auto& t : tokens) {
    if (index_.contains(t)) throw std::invalid_argument("duplicate vocabulary token: " + t);
    add(std::move(t));
  }
}

void Vocabulary::add(std::string token) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

std::vector<std::pair<std::string, std::size_t>> ranked_counts(
    std::span<const Tokens> sentences) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& t : s) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

Vocabulary Vocabulary::build(std::span<const Tokens> sentences, std::size_t min_count) {
  Vocabulary vocab;
  vocab.extend(sentences, min_count);
  return vocab;
}

void Vocabulary::extend(std::span<const Tokens> sentences, std::size_t min_count) {
  for (auto& [token, count] : ranked_counts(sentences)) {
    if (count < min_count) break;
    if (token == kUnkToken || index_.contains(token)) continue;
    add(token);
  }
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::size_t Vocabulary::index(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::size_t index) const {
  if (index >= tokens_.size()) throw std::out_of_range("vocabulary index out of range");
  return tokens_[index];
}

std::vector<std::size_t> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t));
  return out;
}

// --- Files ------------------------------------------------------------------

namespace {

Tokens ingest_tokens(std::string_view text, std::string_view source, std::size_t line_no) {
  Tokens tokens;
  try {
    tokens = tokenize(text);
  } catch (const std::invalid_argument&) {
    throw CorpusFormatError(std::string(source) + ":" + std::to_string(line_no) +
                            ": sentence has no tokens");
  }
  if (tokens.size() > kMaxSentenceLength) {
    util::log_warning(std::string(source) + ":" + std::to_string(line_no) +
                      ": sentence truncated to " + std::to_string(kMaxSentenceLength) +
                      " tokens");
    tokens.resize(kMaxSentenceLength);
  }
  return tokens;
}

bool skip_line(const std::string& line) {
  if (!line.empty() && line.front() == '#') return true;
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return is_space(static_cast<unsigned char>(c)); });
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusFormatError("cannot open corpus file: " + path.string());
  return in;
}

}  // namespace

std::vector<LabeledSentence> read_labeled(std::istream& in, std::string_view source) {
  std::vector<LabeledSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_line(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw CorpusFormatError(std::string(source) + ":" + std::to_string(line_no) +
                              ": labeled line must contain exactly one TAB");
    std::string label = line.substr(0, tab);
    if (label.empty())
      throw CorpusFormatError(std::string(source) + ":" + std::to_string(line_no) +
                              ": empty label");
    LabeledSentence s;
    s.tokens = ingest_tokens(std::string_view(line).substr(tab + 1), source, line_no);
    s.label = std::move(label);
    s.origin = Origin::in_domain;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledSentence> read_labeled(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_labeled(in, path.string());
}

std::vector<LabeledSentence> read_unlabeled(std::istream& in, std::string_view source,
                                            Origin origin) {
  std::vector<LabeledSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_line(line)) continue;
    LabeledSentence s;
    s.tokens = ingest_tokens(line, source, line_no);
    s.origin = origin;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledSentence> read_unlabeled(const std::filesystem::path& path,
                                            Origin origin) {
  auto in = open_input(path);
  return read_unlabeled(in, path.string(), origin);
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

void write_labeled(std::ostream& out, std::span<const LabeledSentence> sentences) {
  for (const auto& s : sentences) {
    if (!s.label) throw std::invalid_argument("write_labeled: sentence without label");
    out << *s.label << '\t' << join_tokens(s.tokens) << '\n';
  }
}

void write_unlabeled(std::ostream& out, std::span<const LabeledSentence> sentences) {
  for (const auto& s : sentences) out << join_tokens(s.tokens) << '\n';
}

// --- Splitting --------------------------------------------------------------

std::vector<std::string> domain_labels(std::span<const LabeledSentence> sentences) {
  std::vector<std::string> labels;
  for (const auto& s : sentences)
    if (s.label) labels.push_back(*s.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> stratified_split(
    std::span<const LabeledSentence> sentences, unsigned train_percent,
    std::uint64_t seed) {
  if (train_percent > 100) throw std::invalid_argument("train_percent must be <= 100");
  std::map<std::string, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!sentences[i].label)
      throw std::invalid_argument("stratified_split: unlabeled sentence at index " +
                                  std::to_string(i));
    by_domain[*sentences[i].label].push_back(i);
  }
  for (const auto& [label, members] : by_domain)
    if (members.size() < 5)
      throw std::invalid_argument("domain '" + label + "' has fewer than 5 sentences");

  // Largest-remainder apportionment of round(N * pct / 100) train slots.
  const std::size_t total = sentences.size();
  const std::size_t total_train = (total * train_percent * 2 + 100) / 200;
  struct Share {
    std::size_t base;
    std::size_t remainder;  // in units of 1/100
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [label, members] : by_domain) {
    const std::size_t scaled = members.size() * train_percent;
    shares.push_back({scaled / 100, scaled % 100});
    assigned += scaled / 100;
  }
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shares[a].remainder > shares[b].remainder;
  });
  for (std::size_t k = 0; assigned < total_train && k < order.size(); ++k) {
    if (shares[order[k]].remainder == 0) break;
    ++shares[order[k]].base;
    ++assigned;
  }

  math::Rng rng(seed);
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> test;
  std::size_t d = 0;
  for (auto& [label, members] : by_domain) {
    rng.shuffle(std::span<std::size_t>(members));
    const std::size_t n_train = shares[d++].base;
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_train ? train : test).push_back(sentences[members[i]]);
  }
  return {std::move(train), std::move(test)};
}

DatasetSplit split_train_test(std::span<const LabeledSentence> id_sentences,
                              std::uint64_t seed) {
  for (const auto& s : id_sentences)
    if (s.origin != Origin::in_domain)
      throw std::invalid_argument("split_train_test: OOD sentence in ID corpus");
  auto [train, test] = stratified_split(id_sentences, 80, seed);
  return DatasetSplit{std::move(train), std::move(test), {}};
}

}  // namespace ood::corpus
