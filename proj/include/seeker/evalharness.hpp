#pragma once

// Automatic metrics (F1, knowledge F1, perplexity), topical-prompt
// construction and aggregation of per-turn / per-completion human flags.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seeker/corpus.hpp"
#include "seeker/json_io.hpp"
#include "seeker/modelio.hpp"

namespace seeker {

struct GoldExample {
  std::string context;
  std::string gold_response;
  std::vector<std::string> gold_knowledge;
  std::optional<std::vector<Document>> gold_docs;
};

struct EvalReport {
  double f1 = 0.0;
  double kf1 = 0.0;
  std::optional<double> ppl;
  std::size_t n = 0;
  std::size_t kf1_missing = 0;  // examples without gold knowledge (scored 0)
};

/// Mean token F1 against the gold response and against the space-joined gold
/// knowledge. When `scorer` can score, ppl is the perplexity of the gold
/// responses given their contexts.
EvalReport eval_generations(const std::vector<std::string>& preds, const std::vector<GoldExample>& golds,
                            GenerationBackend* scorer = nullptr);

/// exp(sum NLL / sum tokens) over (context, target) pairs. Throws CapabilityError
/// when the backend cannot score and PreconditionError when there are no tokens.
double perplexity(GenerationBackend& backend, const std::vector<std::pair<std::string, std::string>>& examples);

struct TopicalPrompt {
  std::string topic;
  std::string prompt;
  bool operator==(const TopicalPrompt&) const = default;
};

std::string topical_prompt_text(std::string_view topic);

/// Drops topics mentioning "covid" (any case) and instantiates the prompt template
/// for the rest, in order.
std::vector<TopicalPrompt> build_topical_prompts(const std::vector<std::string>& topics);

struct TurnAnnotation {
  bool consistent = false;
  bool knowledgeable = false;
  bool factually_incorrect = false;
  bool engaging = false;
  bool operator==(const TurnAnnotation&) const = default;
};

struct CompletionAnnotation {
  bool sensible = false;
  bool true_info = false;
  bool hallucination = false;
  bool topical = false;
  bool operator==(const CompletionAnnotation&) const = default;
};

struct TurnCounts {
  std::size_t n = 0;
  std::size_t consistent = 0;
  std::size_t knowledgeable = 0;
  std::size_t factually_incorrect = 0;
  std::size_t engaging = 0;
  std::size_t knowledgeable_and_engaging = 0;
  bool operator==(const TurnCounts&) const = default;
};

/// Percentages are in [0, 100].
struct TurnSummary {
  std::string model;
  TurnCounts counts;
  double consistent = 0.0;
  double knowledgeable = 0.0;
  double factually_incorrect = 0.0;
  double engaging = 0.0;
  double knowledgeable_and_engaging = 0.0;
  std::optional<double> engaging_given_knowledgeable;  // absent when nothing was knowledgeable
  std::optional<double> mean_rating;                   // session-level 1-5 ratings, when supplied
};

TurnSummary summarize_turn_counts(std::string model, const TurnCounts& counts);

/// One summary per model tag, in order of first appearance.
std::vector<TurnSummary> aggregate_turn_annotations(
    const std::vector<std::pair<std::string, TurnAnnotation>>& records);

struct CompletionSummary {
  std::string model;
  std::size_t n = 0;
  double sensible = 0.0;
  double true_info = 0.0;
  double hallucination = 0.0;
  double topical = 0.0;
};

std::vector<CompletionSummary> aggregate_completion_annotations(
    const std::vector<std::pair<std::string, CompletionAnnotation>>& records);

/// "78.47%" style; "-" for absent values.
std::string format_percent(std::optional<double> pct, int decimals = 2);

/// Columns: Model, Consistent, Knowl., Factually Incorrect, Per-Turn Engaging,
/// Knowl. & Engaging, % Knowl. is Engaging.
std::string format_turn_row(const TurnSummary& s);
std::string format_turn_table(const std::vector<TurnSummary>& rows);

/// Columns: Model, Sensible, True, Hallucination, Topical (whole percents).
std::string format_completion_row(const CompletionSummary& s);
std::string format_completion_table(const std::vector<CompletionSummary>& rows);

/// Columns: Model, PPL, F1, KF1 (F1 and KF1 scaled to percent, one decimal).
std::string format_eval_row(std::string_view model, const EvalReport& r);
std::string format_eval_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

Json eval_report_to_json(const EvalReport& r);
Json turn_summary_to_json(const TurnSummary& s);

Json turn_annotation_to_json(const TurnAnnotation& a);
TurnAnnotation turn_annotation_from_json(const Json& j);

/// {context, gold_response, gold_knowledge: [..] | "..", gold_docs?: [..]} JSONL.
std::vector<GoldExample> load_gold_jsonl(const std::filesystem::path& path);
/// Lines that are a JSON string, or an object with "text" or "response".
std::vector<std::string> load_predictions_jsonl(const std::filesystem::path& path);

}  // namespace seeker
