#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seeker/textops.hpp"

namespace seeker {

struct Document {
  std::string id;
  std::string url;
  std::string domain;
  std::string title;
  std::string content;
  std::vector<SentenceSpan> sentences;

  /// Fills in domain and sentences from url and content.
  static Document make(std::string id, std::string url, std::string title, std::string content);

  bool operator==(const Document&) const = default;
};

/// Lowercased host of `url` reduced to its registrable part: the last two labels,
/// or three when the last two form a common two-level public suffix (co.uk, com.au, ...).
/// Returns "" for urls without a host.
std::string registrable_domain(std::string_view url);

struct SearchHit {
  std::string doc_id;
  double score = 0.0;
  std::optional<std::size_t> matched_sentence;

  bool operator==(const SearchHit&) const = default;
};

class DomainAllowlist {
 public:
  DomainAllowlist() = default;
  /// Entries are lowercased; an entry with a scheme, path, port or whitespace is rejected.
  explicit DomainAllowlist(const std::vector<std::string>& domains);

  /// One domain per line; '#' comments and blank lines are skipped.
  static DomainAllowlist load(const std::filesystem::path& path);

  bool allows(std::string_view domain) const { return domains_.count(std::string(domain)) != 0; }
  const std::set<std::string>& domains() const noexcept { return domains_; }

 private:
  std::set<std::string> domains_;
};

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
};

/// Immutable sentence-level BM25 index over a document collection.
///
/// Every sentence of every document is a retrieval unit. Sentences are numbered
/// globally in (doc_id, sentence index) order, so comparing global ids is the
/// tie-break used everywhere.
class CorpusIndex {
 public:
  struct Posting {
    std::uint32_t sentence;
    std::uint32_t tf;
    bool operator==(const Posting&) const = default;
  };

  CorpusIndex() = default;

  /// Throws PreconditionError naming the first duplicated id.
  static CorpusIndex build(std::vector<Document> docs, Bm25Params params = {});

  const std::vector<Document>& documents() const noexcept { return docs_; }
  const Document* find(std::string_view doc_id) const;
  std::size_t sentence_count() const noexcept { return sentence_doc_.size(); }
  const SentenceSpan& sentence(std::uint32_t gid) const;
  const Document& sentence_document(std::uint32_t gid) const { return docs_[sentence_doc_[gid]]; }
  std::size_t sentence_length(std::uint32_t gid) const { return sentence_len_[gid]; }
  double average_sentence_length() const noexcept { return avg_len_; }
  const Bm25Params& params() const noexcept { return params_; }

  /// Postings for a normalized term, empty when out of vocabulary.
  std::span<const Posting> postings(std::string_view term) const;
  /// Number of sentences containing the term.
  std::size_t document_frequency(std::string_view term) const { return postings(term).size(); }
  double idf(std::string_view term) const;

  /// All (term, postings) pairs sorted by term; used for serialization.
  std::vector<std::pair<std::string, std::vector<Posting>>> sorted_postings() const;

  void save(const std::filesystem::path& path) const;
  static CorpusIndex load(const std::filesystem::path& path);

  bool operator==(const CorpusIndex& other) const;

 private:
  void finalize();

  Bm25Params params_;
  std::vector<Document> docs_;                           // sorted by id
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::uint32_t> sentence_doc_;              // gid -> doc position
  std::vector<std::uint32_t> sentence_pos_;              // gid -> sentence index in doc
  std::vector<std::uint32_t> sentence_len_;              // gid -> normalized token count
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avg_len_ = 0.0;
};

/// Scored sentence, identified by its global id.
struct SentenceHit {
  std::uint32_t sentence;
  double score;
};

/// Sentence-level BM25 ranking. `keep` filters candidates before truncation to k.
/// Sorted by descending score, ties by ascending global id.
std::vector<SentenceHit> search_sentences(const CorpusIndex& index, std::string_view query, std::size_t k,
                                          const std::function<bool(std::uint32_t)>& keep = {});

/// Document-level ranking: a document scores as its best sentence, which becomes
/// matched_sentence. Ties by ascending doc_id then sentence index.
std::vector<SearchHit> lexical_search(const CorpusIndex& index, std::string_view query, std::size_t k);

struct NearestSentence {
  SentenceSpan sentence;
  double f1 = 0.0;
};

/// Among the top `candidate_pool` BM25 sentences for `target` (after excluding
/// exclude_doc and sentences string-equal to the target), the one with the highest
/// token F1 against the target; ties go to the lower (doc_id, sentence index).
std::optional<NearestSentence> nearest_sentence(const CorpusIndex& index, std::string_view target,
                                                std::string_view exclude_doc, std::size_t candidate_pool = 50);

/// Keeps input order, drops documents whose domain is not allowed, truncates to k.
std::vector<Document> filter_allowlist(const std::vector<Document>& docs, const DomainAllowlist& allow,
                                       std::size_t k = 5);

/// Reads {id, url, title, content} JSONL.
std::vector<Document> load_documents_jsonl(const std::filesystem::path& path);

}  // namespace seeker
