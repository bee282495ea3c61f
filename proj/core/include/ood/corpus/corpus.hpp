// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ood::corpus {

using Tokens = std::vector<std::string>;

/// Sentences longer than this are truncated at ingestion.
inline constexpr std::size_t kMaxSentenceLength = 64;

/// Lowercases ASCII, splits on whitespace and strips punctuation from token
/// edges. Tokens that are pure punctuation disappear. Throws
/// std::invalid_argument when no token remains.
Tokens tokenize(std::string_view text);

enum class Origin { in_domain, out_of_domain };

struct LabeledSentence {
  Tokens tokens;
  std::optional<std::string> label;  // domain category; required for ID data
  Origin origin = Origin::in_domain;
};

/// Bidirectional token <-> index map. Index 0 is always the UNK token.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  /// Rebuilds a vocabulary from an ordered token list (index order). The first
  /// entry must be the UNK token.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Tokens with frequency >= min_count are indexed, ordered by
  /// (frequency desc, token asc); everything else maps to UNK.
  static Vocabulary build(std::span<const Tokens> sentences, std::size_t min_count);

  /// Appends tokens from `sentences` not yet present, in the same
  /// (frequency desc, token asc) order.
  void extend(std::span<const Tokens> sentences, std::size_t min_count);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool contains(std::string_view token) const;
  std::size_t index(std::string_view token) const;
  const std::string& token(std::size_t index) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<std::size_t> encode(std::span<const std::string> tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Token frequencies over a corpus, ordered by (frequency desc, token asc).
std::vector<std::pair<std::string, std::size_t>> ranked_counts(
    std::span<const Tokens> sentences);

// ---------------------------------------------------------------------------
// Corpus files: UTF-8, one sentence per line. Labeled files hold
// `label<TAB>text`; unlabeled files hold bare text. Lines starting with `#`
// and blank lines are skipped.

class CorpusFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<LabeledSentence> read_labeled(std::istream& in, std::string_view source);
std::vector<LabeledSentence> read_labeled(const std::filesystem::path& path);
std::vector<LabeledSentence> read_unlabeled(std::istream& in, std::string_view source,
                                            Origin origin);
std::vector<LabeledSentence> read_unlabeled(const std::filesystem::path& path,
                                            Origin origin);

void write_labeled(std::ostream& out, std::span<const LabeledSentence> sentences);
void write_unlabeled(std::ostream& out, std::span<const LabeledSentence> sentences);
std::string join_tokens(std::span<const std::string> tokens);

// ---------------------------------------------------------------------------

struct DatasetSplit {
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> test_id;
  std::vector<LabeledSentence> test_ood;
};

/// Per-domain stratified split keeping `train_percent` of each domain.
/// The overall train count is round(N * pct / 100); each domain receives the
/// floor or ceiling of its own share (largest-remainder apportionment).
/// Throws std::invalid_argument for unlabeled sentences or a domain with
/// fewer than 5 sentences.
std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> stratified_split(
    std::span<const LabeledSentence> sentences, unsigned train_percent, std::uint64_t seed);

/// 80/20 stratified split of ID sentences.
DatasetSplit split_train_test(std::span<const LabeledSentence> id_sentences,
                              std::uint64_t seed);

/// Sorted distinct labels.
std::vector<std::string> domain_labels(std::span<const LabeledSentence> sentences);

}  // namespace ood::corpus
