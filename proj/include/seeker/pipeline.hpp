#pragma once

// The search -> knowledge -> response loop for dialogue turns and LM prompt
// completion. One backend serves all three stages; each stage sees the
// original context plus the outputs of the stages before it.

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seeker/corpus.hpp"
#include "seeker/json_io.hpp"
#include "seeker/modelio.hpp"

namespace seeker {

struct Turn {
  std::string speaker;  // "user" or "model"
  std::string text;
  bool operator==(const Turn&) const = default;
};

struct ConversationState {
  std::string session_id;
  std::vector<Turn> turns;
  std::vector<std::string> accumulated_knowledge;  // one entry per completed model turn
  std::optional<std::string> persona;

  bool operator==(const ConversationState&) const = default;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  virtual std::string name() const = 0;
  /// Ranked documents for the query, at most `depth` of them. Throws RetrievalError on outage.
  virtual std::vector<Document> search(const std::string& query, std::size_t depth) = 0;
};

/// Serves lexical_search hits from an in-memory corpus index.
class LocalIndexProvider final : public SearchProvider {
 public:
  explicit LocalIndexProvider(std::shared_ptr<const CorpusIndex> index) : index_(std::move(index)) {}
  std::string name() const override { return "local-index"; }
  std::vector<Document> search(const std::string& query, std::size_t depth) override;

 private:
  std::shared_ptr<const CorpusIndex> index_;
};

/// Remote JSON search API: POST {q, count} -> {results: [{url, title, content, id?}]}.
class HttpSearchProvider final : public SearchProvider {
 public:
  HttpSearchProvider(std::string endpoint, std::string api_key = {},
                     std::chrono::milliseconds timeout = std::chrono::milliseconds{10000});
  std::string name() const override { return "remote(" + endpoint_ + ")"; }
  std::vector<Document> search(const std::string& query, std::size_t depth) override;

 private:
  std::string endpoint_;
  std::string base_;
  std::string path_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

struct PipelineConfig {
  std::size_t k_docs = 5;
  DefaultSpecs specs;
  std::shared_ptr<SearchProvider> search;
  std::optional<DomainAllowlist> allowlist;
  std::optional<std::string> date_suffix;
  std::size_t search_depth = 10;  // provider results fetched before filtering
  bool search_every_turn = true;
  bool allow_empty_retrieval = false;  // on provider outage, continue without documents
  std::size_t prepend_budget = 512;
  std::size_t fid_budget = kDefaultFidTokenBudget;
  std::optional<PackingStyle> packing;  // overrides the backend's preference for dialogue
  ControlTokens tokens;

  void validate() const;
};

struct StageTiming {
  std::chrono::microseconds start{0};  // offset from the start of the turn
  std::chrono::microseconds duration{0};
  bool operator==(const StageTiming&) const = default;
};

struct TurnTrace {
  std::string query;
  std::vector<Document> retrieved;
  std::string knowledge;
  std::string response;
  std::map<std::string, StageTiming> stage_timings;  // "search", "retrieve", "knowledge", "response"
};

struct Completion {
  std::string prompt;
  std::string query;
  std::vector<Document> retrieved;
  std::string knowledge;
  std::string text;
};

/// Persona plus turns, one per line, dropping the oldest turns until it fits
/// `token_limit` whitespace tokens (the newest turn is cut from the front if it
/// alone is too long).
std::string dialogue_context(const ConversationState& state, std::size_t token_limit);

std::string generate_query(const ConversationState& state, GenerationBackend& backend, const PipelineConfig& cfg);
std::vector<Document> retrieve(const std::string& query, const PipelineConfig& cfg);
/// Appends the knowledge to state.accumulated_knowledge on success.
std::string generate_knowledge(ConversationState& state, const std::vector<Document>& docs,
                               GenerationBackend& backend, const PipelineConfig& cfg);
std::string generate_response(const ConversationState& state, const std::string& knowledge,
                              GenerationBackend& backend, const PipelineConfig& cfg);

/// Runs one full turn. On failure the state is restored to its pre-turn value and
/// a StageError naming the failing stage is thrown.
TurnTrace run_turn(ConversationState& state, const std::string& user_message, GenerationBackend& backend,
                   const PipelineConfig& cfg);

Completion complete_prompt(const std::string& prompt, GenerationBackend& backend, const PipelineConfig& cfg);

/// Client-facing trace: {query, docs: [{title, url}], knowledge, response, stage_timings}.
Json trace_to_json(const TurnTrace& trace);
Json completion_to_json(const Completion& c);

}  // namespace seeker
