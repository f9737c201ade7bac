#pragma once

// Fine-tuning example construction for the search, knowledge and response
// tasks, in both the dialogue and the language-modeling settings.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "seeker/corpus.hpp"
#include "seeker/json_io.hpp"
#include "seeker/modelio.hpp"

namespace seeker {

enum class TaskKind { SearchQuery, Knowledge, Response };

std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);

struct TrainingExample {
  TaskKind kind = TaskKind::Knowledge;
  std::string context;
  std::string target;
  std::vector<Document> docs;
  std::map<std::string, std::string> meta;

  bool operator==(const TrainingExample&) const = default;
};

struct TaskGenConfig {
  double msmarco_f1_min = 0.5;
  double mining_f1_min = 0.33;
  std::size_t min_knowledge_words = 5;
  bool require_shared_entity = true;
  std::size_t candidate_pool = 50;
  ControlTokens tokens;

  void validate() const;
};

/// Drops "(...)" groups and everything from the first " - " on, then trims and
/// collapses whitespace. Returns nullopt when nothing is left.
std::optional<std::string> simplify_title(std::string_view title);

/// Sentences [0, cut) of the document followed by the query control token, with
/// the simplified title as target. Requires 1 <= cut < #sentences; nullopt on a
/// degenerate title.
std::optional<TrainingExample> build_lm_search_task(const Document& doc, std::size_t cut_sentence,
                                                    const ControlTokens& tokens = {});

struct KnowledgeMining {
  std::optional<TrainingExample> example;
  std::optional<NearestSentence> mined;
  // "", "no_candidate", "min_words", "f1", or "shared_entity".
  std::string rejected_by;
};

/// Mines the sentence closest to sentence `target_idx` from other documents and
/// keeps it only if it passes the word-count, F1 and shared-entity filters.
KnowledgeMining build_lm_knowledge_task(const Document& doc, std::size_t target_idx, const CorpusIndex& index,
                                        const TaskGenConfig& cfg);

/// Companion search task: predict the simplified title of the document the mined
/// knowledge came from.
std::optional<TrainingExample> build_lm_knowledge_title_task(const TrainingExample& knowledge_example,
                                                             const CorpusIndex& index,
                                                             const ControlTokens& tokens = {});

/// Document prefix plus framed knowledge, with sentence `target_idx` as target.
TrainingExample build_lm_response_task(const Document& doc, std::size_t target_idx, std::string_view knowledge,
                                       const ControlTokens& tokens = {});

struct RemappedTarget {
  std::string sentence;
  double f1 = 0.0;
  std::size_t index = 0;
};

/// Highest-F1 input sentence for an abstractive answer (earliest wins ties);
/// nullopt when that F1 is below f1_min or there are no sentences.
std::optional<RemappedTarget> remap_extractive_target(std::string_view answer,
                                                      const std::vector<std::string>& input_sentences,
                                                      double f1_min);

TrainingExample build_dialogue_knowledge_example(std::string_view dialogue_context, std::string_view gold_knowledge,
                                                 std::vector<Document> docs);

TrainingExample build_dialogue_response_example(std::string_view dialogue_context, std::string_view gold_knowledge,
                                                std::string_view gold_response, const ControlTokens& tokens = {});

/// PersonaChat / ED / BST knowledge target: the first entity of the response
/// that also appears verbatim in the context.
std::optional<std::string> entity_knowledge_target(std::string_view context, std::string_view response);

/// Uniformly samples `count` lines (order preserved) from a pool of dialogue
/// history to build the sampled-context NQ variant.
std::vector<std::string> sample_dialogue_history(const std::vector<std::string>& pool, std::size_t count,
                                                 std::mt19937_64& rng);

Json example_to_json(const TrainingExample& ex);
TrainingExample example_from_json(const Json& j);

/// JSONL, one example per line. Throws IoError carrying the path and cause.
std::size_t serialize_examples(const std::vector<TrainingExample>& examples, const std::filesystem::path& path);
std::vector<TrainingExample> deserialize_examples(const std::filesystem::path& path);

struct LmTaskKinds {
  bool search = true;
  bool knowledge = true;
  bool response = true;
};

/// Parses "search,knowledge,response" (any subset).
LmTaskKinds parse_lm_task_kinds(std::string_view csv);

/// Language-modeling task set over every document of the index with >= 2
/// sentences: one seeded sentence-boundary cut per document, a title search
/// task, a mined knowledge task (plus its title companion) and a response task
/// grounded on the mined knowledge. Output is ordered by document id.
std::vector<TrainingExample> generate_lm_tasks(const CorpusIndex& index, const TaskGenConfig& cfg,
                                               std::uint64_t seed, LmTaskKinds kinds = {});

/// One abstractive QA record: question, free-form answer and retrieved passages.
struct AbstractiveQaRecord {
  std::string query;
  std::string answer;
  std::vector<Document> passages;
};

/// Reads {query, answer, passages: [string | {id?, url?, title?, text}]} JSONL.
std::vector<AbstractiveQaRecord> load_abstractive_qa(const std::filesystem::path& path);

struct RemapStats {
  std::size_t seen = 0;
  std::size_t retained = 0;
};

/// Knowledge (and optionally response) examples for records whose best passage
/// sentence reaches f1_min.
std::vector<TrainingExample> remap_abstractive_qa(const std::vector<AbstractiveQaRecord>& records, double f1_min,
                                                  bool with_response, RemapStats* stats = nullptr,
                                                  const ControlTokens& tokens = {});

/// Generic grounded-dialogue record produced by dataset adapters.
struct DialogueRecord {
  std::string context;
  std::string gold_knowledge;
  std::string gold_response;
  std::vector<Document> docs;
};

/// Reads {context, gold_knowledge, gold_response, docs?: [{id, url, title, content}]} JSONL.
std::vector<DialogueRecord> load_dialogue_records(const std::filesystem::path& path);

}  // namespace seeker
