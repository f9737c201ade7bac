#pragma once

// Generation-backend contract, control-token framing, document packing and the
// decoding-constraint wrapper shared by the three pipeline stages.

#include <cstddef>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seeker/corpus.hpp"
#include "seeker/textops.hpp"

namespace seeker {

struct ControlTokens {
  std::string generate_query = "__generate-query__";
  std::string knowledge_open = "__knowledge__";
  std::string knowledge_close = "__endknowledge__";

  /// Throws PreconditionError unless the tokens are non-empty and pairwise distinct.
  void validate() const;
  bool appears_in(std::string_view text) const;
};

/// Defuses verbatim control tokens in untrusted text by inserting a space after
/// their first character, so user input can never open or close a frame.
std::string escape_control_tokens(std::string_view text, const ControlTokens& tokens = {});

enum class Strategy { Greedy, Beam };
enum class BlockSource { Context, PastKnowledge, SelfGenerated };

std::string_view to_string(Strategy s);
std::string_view to_string(BlockSource s);

struct DecodingSpec {
  Strategy strategy = Strategy::Greedy;
  std::size_t beam_size = 1;
  std::size_t min_length = 0;  // normalized tokens
  std::size_t block_n = 0;     // 0 disables blocking
  std::set<BlockSource> block_sources;

  void validate() const;
  bool blocks(BlockSource s) const { return block_n > 0 && block_sources.count(s) != 0; }
  bool operator==(const DecodingSpec&) const = default;
};

/// Decoding settings per stage: greedy queries of at least two tokens, beam-3
/// knowledge of at least 10 tokens with trigram blocking against context, past
/// knowledge and itself, beam-10 responses of at least 20 tokens with trigram
/// blocking against context and itself, greedy LM completion.
struct DefaultSpecs {
  DecodingSpec search{Strategy::Greedy, 1, 2, 0, {}};
  DecodingSpec knowledge{Strategy::Beam, 3, 10, 3,
                         {BlockSource::Context, BlockSource::PastKnowledge, BlockSource::SelfGenerated}};
  DecodingSpec response{Strategy::Beam, 10, 20, 3, {BlockSource::Context, BlockSource::SelfGenerated}};
  DecodingSpec lm_completion{Strategy::Greedy, 1, 0, 0, {}};
};

enum class PackingStyle { FusionSlots, Prepend };

std::string_view to_string(PackingStyle s);

struct FusionSlot {
  std::string header;
  std::string body;
  std::string context;
  bool operator==(const FusionSlot&) const = default;
};

struct PackedInput {
  PackingStyle style = PackingStyle::Prepend;
  std::vector<FusionSlot> slots;  // FusionSlots only
  std::string flat_text;          // Prepend only
  std::string context;
  std::size_t per_doc_token_budget = 0;

  /// Single-string view of the input, used by pattern-matching backends and logs.
  std::string render() const;
  bool operator==(const PackedInput&) const = default;
};

inline constexpr std::string_view kPrependSeparator = "\n---\n";
inline constexpr std::size_t kDefaultFidTokenBudget = 256;

/// Whitespace token count, the unit of packing budgets.
std::size_t count_tokens(std::string_view text);
/// First n whitespace tokens joined by single spaces.
std::string truncate_tokens(std::string_view text, std::size_t n);

/// One slot per document (header = title, body = content truncated to the budget),
/// each carrying the full context. No documents gives a single context-only slot.
PackedInput pack_fid(std::string_view context, const std::vector<Document>& docs,
                     std::size_t per_doc_budget = kDefaultFidTokenBudget);

/// doc_1 SEP ... doc_k SEP context. The budget is split evenly across documents,
/// the remainder going to the earliest ones.
PackedInput pack_prepend(std::string_view context, const std::vector<Document>& docs, std::size_t budget);

struct UnpackedPrepend {
  std::vector<std::string> docs;
  std::string context;
};

/// Inverse of pack_prepend given the document count.
UnpackedPrepend unpack_prepend(std::string_view flat_text, std::size_t doc_count);

/// Union of the normalized n-grams of every source.
NGramSet collect_banned_ngrams(const std::vector<std::string>& sources, std::size_t n);

struct ScoreResult {
  double nll = 0.0;  // total negative log-likelihood, nats
  std::size_t token_count = 0;
};

/// A text generator serving all three stages. generate() returns ranked
/// hypotheses (best first); greedy backends usually return one.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  std::vector<std::string> generate(const PackedInput& input, const DecodingSpec& spec, const NGramSet& banned);
  /// Absent when the backend cannot score.
  std::optional<ScoreResult> score(const PackedInput& input, std::string_view continuation);

  virtual std::string name() const = 0;
  /// False declares single-flight: calls are then serialized by this class.
  virtual bool concurrent() const { return true; }
  virtual bool supports_scoring() const { return false; }
  virtual PackingStyle preferred_packing() const { return PackingStyle::FusionSlots; }
  virtual std::size_t context_token_limit() const { return 1024; }

 protected:
  virtual std::vector<std::string> do_generate(const PackedInput& input, const DecodingSpec& spec,
                                               const NGramSet& banned) = 0;
  virtual std::optional<ScoreResult> do_score(const PackedInput&, std::string_view) { return std::nullopt; }

 private:
  std::mutex single_flight_;
};

/// Why a hypothesis fails the DecodingSpec, or nullopt when it satisfies it.
std::optional<std::string> constraint_violation(std::string_view text, const DecodingSpec& spec,
                                                const NGramSet& banned);

/// Returns the best backend hypothesis that satisfies the DecodingSpec: at least
/// min_length normalized tokens, no n-gram from `banned`, and (when SelfGenerated
/// blocking is on) no repeated n-gram within itself. Throws ConstraintError when
/// no hypothesis qualifies; backend failures surface as BackendError.
std::string decode_with_constraints(GenerationBackend& backend, const PackedInput& input, const DecodingSpec& spec,
                                    const NGramSet& banned);

/// context, then the framed knowledge segment. Throws PreconditionError when the
/// knowledge is empty or contains a control token, or the context is already framed.
std::string frame_knowledge(std::string_view context, std::string_view knowledge, const ControlTokens& tokens = {});

struct Framed {
  std::string context;
  std::string knowledge;
  bool operator==(const Framed&) const = default;
};

/// Inverse of frame_knowledge; throws PreconditionError unless exactly one segment is present.
Framed unframe_knowledge(std::string_view framed, const ControlTokens& tokens = {});

/// Number of knowledge_open markers in text.
std::size_t count_framed_segments(std::string_view text, const ControlTokens& tokens = {});

}  // namespace seeker
