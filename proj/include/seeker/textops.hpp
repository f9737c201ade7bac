#pragma once

// Deterministic text primitives: SQuAD-style normalization, token F1,
// rule-based sentence splitting, n-grams and a capitalization entity
// heuristic. Everything here is a pure function.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace seeker {

struct NormalizedTokens {
  std::vector<std::string> tokens;
  // Byte offset into the source text where each token's word starts.
  std::vector<std::size_t> source_offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  bool operator==(const NormalizedTokens&) const = default;
};

using NGram = std::vector<std::string>;

struct NGramSet {
  std::size_t n = 0;
  std::set<NGram> grams;

  bool contains(const NGram& g) const { return grams.count(g) != 0; }
  std::size_t size() const noexcept { return grams.size(); }
  bool empty() const noexcept { return grams.empty(); }
  /// Set union; both sets must share the same n (an empty set adopts the other's n).
  void merge(const NGramSet& other);
  bool operator==(const NGramSet&) const = default;
};

struct SentenceSpan {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  std::size_t token_count = 0;
  // [begin, end) byte range of `text` inside the source.
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SentenceSpan&) const = default;
};

struct EntitySpan {
  std::string surface;
  std::optional<std::string> label;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const EntitySpan&) const = default;
};

NormalizedTokens normalize(std::string_view text);

/// 2|pred ∩ gold| / (|pred| + |gold|) over token multisets. 0 when either side is empty.
double f1_overlap(const NormalizedTokens& pred, const NormalizedTokens& gold);
double f1_overlap(const std::vector<std::string>& pred, const std::vector<std::string>& gold);
double f1_overlap(std::string_view pred, std::string_view gold);

/// Lowercase abbreviations (with trailing period, e.g. "dr.") that do not end a sentence.
class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(std::unordered_set<std::string> entries);

  /// Line-delimited file; blank lines and lines starting with '#' are ignored.
  static AbbreviationList load(const std::filesystem::path& path);
  /// The list shipped in data/abbreviations.txt, compiled in.
  static const AbbreviationList& builtin();

  bool contains(std::string_view word_lower) const;
  const std::unordered_set<std::string>& entries() const noexcept { return entries_; }

 private:
  std::unordered_set<std::string> entries_;
};

std::vector<SentenceSpan> split_sentences(std::string_view text, std::string_view doc_id = {},
                                          const AbbreviationList& abbrev = AbbreviationList::builtin());

NGramSet ngrams(const std::vector<std::string>& tokens, std::size_t n);
NGramSet ngrams(const NormalizedTokens& tokens, std::size_t n);

/// Pluggable named-entity source. `companion` is additional text the provider
/// may consult as evidence (shared_entity passes the other side of the pair).
class EntityProvider {
 public:
  virtual ~EntityProvider() = default;
  virtual std::vector<EntitySpan> extract(std::string_view text, std::string_view companion) const = 0;
};

/// Maximal runs of capitalized words; a run ends at a word carrying trailing punctuation
/// and before a word opened by a quote or bracket. A run that is a single word at the start of a
/// sentence is dropped unless that word recurs capitalized in the evidence (text plus
/// companion) or appears capitalized somewhere other than a sentence start. The
/// pronoun "I" is never an entity, and neither is a common function word ("The", "We",
/// "However", ...) in sentence-initial position.
class CapitalizationEntityProvider final : public EntityProvider {
 public:
  std::vector<EntitySpan> extract(std::string_view text, std::string_view companion) const override;
};

const EntityProvider& default_entity_provider();

std::vector<EntitySpan> extract_entities(std::string_view text, std::string_view companion = {},
                                         const EntityProvider& provider = default_entity_provider());

/// True iff the entity sets of a and b share a surface form, compared
/// case-insensitively; multi-word surfaces also match on each of their words.
bool shared_entity(std::string_view a, std::string_view b,
                   const EntityProvider& provider = default_entity_provider());

// Small helpers shared across modules.
std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace seeker
