#include "seeker/pipeline.hpp"

#include <algorithm>

#include "seeker/errors.hpp"

namespace seeker {

namespace {

using Clock = std::chrono::steady_clock;

PackedInput pack_for_dialogue(const std::string& context, const std::vector<Document>& docs,
                              GenerationBackend& backend, const PipelineConfig& cfg) {
  const PackingStyle style = cfg.packing.value_or(backend.preferred_packing());
  if (style == PackingStyle::FusionSlots) return pack_fid(context, docs, cfg.fid_budget);
  return pack_prepend(context, docs, cfg.prepend_budget);
}

NGramSet banned_for(const DecodingSpec& spec, const std::string& context,
                    const std::vector<std::string>* past_knowledge) {
  NGramSet banned;
  banned.n = spec.block_n;
  if (spec.block_n == 0) return banned;
  std::vector<std::string> sources;
  if (spec.blocks(BlockSource::Context)) sources.push_back(context);
  if (past_knowledge && spec.blocks(BlockSource::PastKnowledge))
    sources.insert(sources.end(), past_knowledge->begin(), past_knowledge->end());
  return collect_banned_ngrams(sources, spec.block_n);
}

// Translates library errors into a StageError carrying the stage label.
template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ConstraintError& e) {
    throw StageError(stage, StageError::Cause::Constraint, e.what());
  } catch (const BackendError& e) {
    throw StageError(stage, StageError::Cause::Backend, e.what());
  } catch (const RetrievalError& e) {
    throw StageError(stage, StageError::Cause::Retrieval, e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, StageError::Cause::Other, e.what());
  }
}

std::string query_with_suffix(std::string query, const PipelineConfig& cfg) {
  query = trim(query);
  if (cfg.date_suffix && !cfg.date_suffix->empty()) query += " " + *cfg.date_suffix;
  return query;
}

std::string decode_query(const std::string& context, PackingStyle style, GenerationBackend& backend,
                         const PipelineConfig& cfg) {
  const std::string input_text = context.empty() ? cfg.tokens.generate_query
                                                 : context + " " + cfg.tokens.generate_query;
  const PackedInput input = style == PackingStyle::FusionSlots ? pack_fid(input_text, {}, cfg.fid_budget)
                                                               : pack_prepend(input_text, {}, cfg.prepend_budget);
  NGramSet none;
  none.n = cfg.specs.search.block_n;
  return query_with_suffix(decode_with_constraints(backend, input, cfg.specs.search, none), cfg);
}

}  // namespace

void PipelineConfig::validate() const {
  if (k_docs < 1) throw PreconditionError("k_docs must be >= 1");
  if (prepend_budget < 1 || fid_budget < 1) throw PreconditionError("packing budgets must be >= 1");
  specs.search.validate();
  specs.knowledge.validate();
  specs.response.validate();
  specs.lm_completion.validate();
  tokens.validate();
}

std::string dialogue_context(const ConversationState& state, std::size_t token_limit) {
  std::vector<std::string> lines;
  for (const auto& t : state.turns) lines.push_back(t.text);
  std::size_t first = 0;
  auto total = [&](std::size_t from) {
    std::size_t n = state.persona ? count_tokens(*state.persona) : 0;
    for (std::size_t i = from; i < lines.size(); ++i) n += count_tokens(lines[i]);
    return n;
  };
  while (first + 1 < lines.size() && total(first) > token_limit) ++first;
  std::vector<std::string> kept;
  if (state.persona && !state.persona->empty()) kept.push_back(*state.persona);
  kept.insert(kept.end(), lines.begin() + static_cast<std::ptrdiff_t>(first), lines.end());
  std::string ctx = join(kept, "\n");
  if (count_tokens(ctx) > token_limit) {
    auto toks = split_whitespace(ctx);
    toks.erase(toks.begin(), toks.end() - static_cast<std::ptrdiff_t>(token_limit));
    ctx = join(toks, " ");
  }
  return ctx;
}

std::string generate_query(const ConversationState& state, GenerationBackend& backend, const PipelineConfig& cfg) {
  if (std::none_of(state.turns.begin(), state.turns.end(), [](const Turn& t) { return t.speaker == "user"; }))
    throw PreconditionError("generate_query: conversation has no user turn");
  const std::string context = dialogue_context(state, backend.context_token_limit());
  return in_stage("search", [&] {
    return decode_query(context, cfg.packing.value_or(backend.preferred_packing()), backend, cfg);
  });
}

std::vector<Document> retrieve(const std::string& query, const PipelineConfig& cfg) {
  if (trim(query).empty()) throw PreconditionError("retrieve: empty query");
  return in_stage("retrieve", [&] {
    if (!cfg.search) throw RetrievalError("none", "no search provider configured");
    std::vector<Document> hits;
    try {
      hits = cfg.search->search(query, std::max(cfg.search_depth, cfg.k_docs));
    } catch (const RetrievalError&) {
      throw;
    } catch (const std::exception& e) {
      throw RetrievalError(cfg.search->name(), e.what());
    }
    if (cfg.allowlist) return filter_allowlist(hits, *cfg.allowlist, cfg.k_docs);
    if (hits.size() > cfg.k_docs) hits.resize(cfg.k_docs);
    return hits;
  });
}

std::string generate_knowledge(ConversationState& state, const std::vector<Document>& docs,
                               GenerationBackend& backend, const PipelineConfig& cfg) {
  const std::string context = dialogue_context(state, backend.context_token_limit());
  std::string knowledge = in_stage("knowledge", [&] {
    const PackedInput input = pack_for_dialogue(context, docs, backend, cfg);
    const NGramSet banned = banned_for(cfg.specs.knowledge, context, &state.accumulated_knowledge);
    return escape_control_tokens(trim(decode_with_constraints(backend, input, cfg.specs.knowledge, banned)),
                                 cfg.tokens);
  });
  state.accumulated_knowledge.push_back(knowledge);
  return knowledge;
}

std::string generate_response(const ConversationState& state, const std::string& knowledge,
                              GenerationBackend& backend, const PipelineConfig& cfg) {
  if (trim(knowledge).empty()) throw PreconditionError("generate_response: knowledge must be non-empty");
  const std::string context = dialogue_context(state, backend.context_token_limit());
  return in_stage("response", [&] {
    const std::string framed = frame_knowledge(context, knowledge, cfg.tokens);
    const PackedInput input = pack_for_dialogue(framed, {}, backend, cfg);
    const NGramSet banned = banned_for(cfg.specs.response, context, nullptr);
    return trim(decode_with_constraints(backend, input, cfg.specs.response, banned));
  });
}

TurnTrace run_turn(ConversationState& state, const std::string& user_message, GenerationBackend& backend,
                   const PipelineConfig& cfg) {
  if (trim(user_message).empty()) throw PreconditionError("run_turn: empty user message");
  const ConversationState snapshot = state;
  const auto turn_start = Clock::now();
  TurnTrace trace;
  auto timed = [&](const char* stage, auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    trace.stage_timings[stage] =
        StageTiming{std::chrono::duration_cast<std::chrono::microseconds>(t0 - turn_start),
                    std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0)};
  };
  try {
    state.turns.push_back(Turn{"user", escape_control_tokens(trim(user_message), cfg.tokens)});
    if (cfg.search_every_turn) {
      timed("search", [&] { trace.query = generate_query(state, backend, cfg); });
      timed("retrieve", [&] {
        try {
          trace.retrieved = retrieve(trace.query, cfg);
        } catch (const StageError& e) {
          if (!cfg.allow_empty_retrieval || e.cause() != StageError::Cause::Retrieval) throw;
          trace.retrieved.clear();
        }
      });
    }
    timed("knowledge", [&] { trace.knowledge = generate_knowledge(state, trace.retrieved, backend, cfg); });
    timed("response", [&] { trace.response = generate_response(state, trace.knowledge, backend, cfg); });
    state.turns.push_back(Turn{"model", trace.response});
  } catch (...) {
    state = snapshot;
    throw;
  }
  return trace;
}

Completion complete_prompt(const std::string& prompt, GenerationBackend& backend, const PipelineConfig& cfg) {
  if (trim(prompt).empty()) throw PreconditionError("complete_prompt: empty prompt");
  Completion out;
  out.prompt = prompt;
  const std::string context = escape_control_tokens(trim(prompt), cfg.tokens);

  out.query = in_stage("search", [&] { return decode_query(context, PackingStyle::Prepend, backend, cfg); });
  try {
    out.retrieved = retrieve(out.query, cfg);
  } catch (const StageError& e) {
    if (!cfg.allow_empty_retrieval || e.cause() != StageError::Cause::Retrieval) throw;
  }
  out.knowledge = in_stage("knowledge", [&] {
    const PackedInput input = pack_prepend(context, out.retrieved, cfg.prepend_budget);
    const NGramSet banned = banned_for(cfg.specs.knowledge, context, nullptr);
    return escape_control_tokens(trim(decode_with_constraints(backend, input, cfg.specs.knowledge, banned)),
                                 cfg.tokens);
  });
  out.text = in_stage("response", [&] {
    const PackedInput input = pack_prepend(frame_knowledge(context, out.knowledge, cfg.tokens), {}, cfg.prepend_budget);
    const NGramSet banned = banned_for(cfg.specs.lm_completion, context, nullptr);
    return trim(decode_with_constraints(backend, input, cfg.specs.lm_completion, banned));
  });
  return out;
}

Json trace_to_json(const TurnTrace& trace) {
  Json j;
  j["query"] = trace.query;
  Json docs = Json::array();
  for (const auto& d : trace.retrieved) docs.push_back(Json{{"title", d.title}, {"url", d.url}});
  j["docs"] = std::move(docs);
  j["knowledge"] = trace.knowledge;
  j["response"] = trace.response;
  Json timings = Json::object();
  for (const auto& [stage, t] : trace.stage_timings)
    timings[stage] = Json{{"start_us", t.start.count()}, {"duration_us", t.duration.count()}};
  j["stage_timings"] = std::move(timings);
  return j;
}

Json completion_to_json(const Completion& c) {
  Json j;
  j["prompt"] = c.prompt;
  j["query"] = c.query;
  Json docs = Json::array();
  for (const auto& d : c.retrieved) docs.push_back(Json{{"title", d.title}, {"url", d.url}});
  j["docs"] = std::move(docs);
  j["knowledge"] = c.knowledge;
  j["text"] = c.text;
  return j;
}

}  // namespace seeker
