#include "seeker/modelio.hpp"

#include <algorithm>
#include <map>

#include "seeker/errors.hpp"

namespace seeker {

void ControlTokens::validate() const {
  const std::string* all[] = {&generate_query, &knowledge_open, &knowledge_close};
  for (const auto* t : all) {
    if (t->empty()) throw PreconditionError("control tokens must be non-empty");
    if (t->find_first_of(" \t\n") != std::string::npos)
      throw PreconditionError("control tokens must not contain whitespace");
  }
  if (generate_query == knowledge_open || generate_query == knowledge_close || knowledge_open == knowledge_close)
    throw PreconditionError("control tokens must be pairwise distinct");
}

bool ControlTokens::appears_in(std::string_view text) const {
  return text.find(generate_query) != std::string_view::npos || text.find(knowledge_open) != std::string_view::npos ||
         text.find(knowledge_close) != std::string_view::npos;
}

std::string escape_control_tokens(std::string_view text, const ControlTokens& tokens) {
  std::vector<std::string> list = {tokens.generate_query, tokens.knowledge_open, tokens.knowledge_close};
  std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::string out(text);
  for (const auto& t : list) {
    const std::string replacement = t.substr(0, 1) + " " + t.substr(1);
    std::size_t pos = 0;
    while ((pos = out.find(t, pos)) != std::string::npos) {
      out.replace(pos, t.size(), replacement);
      pos += replacement.size();
    }
  }
  return out;
}

std::string_view to_string(Strategy s) { return s == Strategy::Greedy ? "greedy" : "beam"; }

std::string_view to_string(BlockSource s) {
  switch (s) {
    case BlockSource::Context: return "context";
    case BlockSource::PastKnowledge: return "past_knowledge";
    case BlockSource::SelfGenerated: return "self_generated";
  }
  return "?";
}

std::string_view to_string(PackingStyle s) { return s == PackingStyle::FusionSlots ? "fid" : "prepend"; }

void DecodingSpec::validate() const {
  if (beam_size < 1) throw PreconditionError("beam_size must be >= 1");
  if (strategy == Strategy::Greedy && beam_size != 1) throw PreconditionError("greedy decoding requires beam_size 1");
}

// ---------------------------------------------------------------------------
// Packing

std::size_t count_tokens(std::string_view text) { return split_whitespace(text).size(); }

std::string truncate_tokens(std::string_view text, std::size_t n) {
  auto toks = split_whitespace(text);
  if (toks.size() > n) toks.resize(n);
  return join(toks, " ");
}

std::string PackedInput::render() const {
  if (style == PackingStyle::Prepend) return flat_text;
  std::string out;
  for (const auto& slot : slots) {
    if (slot.header.empty() && slot.body.empty()) continue;
    out += slot.header;
    out += ": ";
    out += slot.body;
    out += kPrependSeparator;
  }
  out += context;
  return out;
}

PackedInput pack_fid(std::string_view context, const std::vector<Document>& docs, std::size_t per_doc_budget) {
  PackedInput in;
  in.style = PackingStyle::FusionSlots;
  in.context = std::string(context);
  in.per_doc_token_budget = per_doc_budget;
  for (const auto& d : docs) {
    in.slots.push_back(FusionSlot{escape_control_tokens(d.title),
                                  truncate_tokens(escape_control_tokens(d.content), per_doc_budget), in.context});
  }
  if (in.slots.empty()) in.slots.push_back(FusionSlot{"", "", in.context});
  return in;
}

PackedInput pack_prepend(std::string_view context, const std::vector<Document>& docs, std::size_t budget) {
  if (budget < 1) throw PreconditionError("pack_prepend: budget must be >= 1");
  PackedInput in;
  in.style = PackingStyle::Prepend;
  in.context = std::string(context);
  const std::size_t k = docs.size();
  in.per_doc_token_budget = k == 0 ? budget : budget / k;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t share = budget / k + (i < budget % k ? 1 : 0);
    in.flat_text += truncate_tokens(escape_control_tokens(docs[i].content), share);
    in.flat_text += kPrependSeparator;
  }
  in.flat_text += in.context;
  return in;
}

UnpackedPrepend unpack_prepend(std::string_view flat_text, std::size_t doc_count) {
  UnpackedPrepend out;
  std::string_view rest = flat_text;
  for (std::size_t i = 0; i < doc_count; ++i) {
    const auto pos = rest.find(kPrependSeparator);
    if (pos == std::string_view::npos) throw PreconditionError("unpack_prepend: missing separator");
    out.docs.emplace_back(rest.substr(0, pos));
    rest.remove_prefix(pos + kPrependSeparator.size());
  }
  out.context = std::string(rest);
  return out;
}

NGramSet collect_banned_ngrams(const std::vector<std::string>& sources, std::size_t n) {
  NGramSet out;
  out.n = n;
  for (const auto& s : sources) out.merge(ngrams(normalize(s), n));
  return out;
}

// ---------------------------------------------------------------------------
// Backend + constrained decoding

std::vector<std::string> GenerationBackend::generate(const PackedInput& input, const DecodingSpec& spec,
                                                     const NGramSet& banned) {
  if (concurrent()) return do_generate(input, spec, banned);
  std::lock_guard lock(single_flight_);
  return do_generate(input, spec, banned);
}

std::optional<ScoreResult> GenerationBackend::score(const PackedInput& input, std::string_view continuation) {
  if (!supports_scoring()) return std::nullopt;
  if (concurrent()) return do_score(input, continuation);
  std::lock_guard lock(single_flight_);
  return do_score(input, continuation);
}

std::optional<std::string> constraint_violation(std::string_view text, const DecodingSpec& spec,
                                                const NGramSet& banned) {
  const auto toks = normalize(text).tokens;
  if (toks.size() < spec.min_length) {
    return "length " + std::to_string(toks.size()) + " < min_length " + std::to_string(spec.min_length);
  }
  if (spec.block_n == 0 || toks.size() < spec.block_n) return std::nullopt;
  const bool check_banned = !banned.empty();
  if (check_banned && banned.n != spec.block_n)
    throw PreconditionError("banned n-gram order does not match spec.block_n");
  const bool check_self = spec.block_sources.count(BlockSource::SelfGenerated) != 0;
  std::set<NGram> seen;
  for (std::size_t i = 0; i + spec.block_n <= toks.size(); ++i) {
    NGram g(toks.begin() + static_cast<std::ptrdiff_t>(i),
            toks.begin() + static_cast<std::ptrdiff_t>(i + spec.block_n));
    if (check_banned && banned.contains(g)) return "blocked n-gram '" + join(g, " ") + "'";
    if (check_self && !seen.insert(g).second) return "repeated n-gram '" + join(g, " ") + "'";
  }
  return std::nullopt;
}

std::string decode_with_constraints(GenerationBackend& backend, const PackedInput& input, const DecodingSpec& spec,
                                    const NGramSet& banned) {
  spec.validate();
  std::vector<std::string> hypotheses;
  try {
    hypotheses = backend.generate(input, spec, banned);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError(backend.name() + ": " + e.what());
  }
  if (hypotheses.empty()) throw ConstraintError(backend.name() + " returned no hypotheses");
  std::string reasons;
  for (auto& h : hypotheses) {
    auto why = constraint_violation(h, spec, banned);
    if (!why) return std::move(h);
    if (!reasons.empty()) reasons += "; ";
    reasons += *why;
  }
  throw ConstraintError("no hypothesis satisfies the decoding constraints (" + reasons + ")");
}

// ---------------------------------------------------------------------------
// Framing

std::string frame_knowledge(std::string_view context, std::string_view knowledge, const ControlTokens& tokens) {
  if (trim(knowledge).empty()) throw PreconditionError("frame_knowledge: knowledge must be non-empty");
  if (tokens.appears_in(knowledge)) throw PreconditionError("frame_knowledge: knowledge contains a control token");
  if (context.find(tokens.knowledge_open) != std::string_view::npos ||
      context.find(tokens.knowledge_close) != std::string_view::npos)
    throw PreconditionError("frame_knowledge: context is already framed");
  std::string out(context);
  if (!out.empty()) out += '\n';
  out += tokens.knowledge_open;
  out += ' ';
  out += knowledge;
  out += ' ';
  out += tokens.knowledge_close;
  return out;
}

std::size_t count_framed_segments(std::string_view text, const ControlTokens& tokens) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(tokens.knowledge_open); pos != std::string_view::npos;
       pos = text.find(tokens.knowledge_open, pos + tokens.knowledge_open.size()))
    ++count;
  return count;
}

Framed unframe_knowledge(std::string_view framed, const ControlTokens& tokens) {
  const auto open = framed.find(tokens.knowledge_open);
  if (open == std::string_view::npos || count_framed_segments(framed, tokens) != 1)
    throw PreconditionError("unframe_knowledge: expected exactly one knowledge segment");
  const std::string tail = " " + tokens.knowledge_close;
  if (!framed.ends_with(tail) || framed.find(tokens.knowledge_close) != framed.size() - tokens.knowledge_close.size())
    throw PreconditionError("unframe_knowledge: segment is not closed at the end");
  const std::size_t body_begin = open + tokens.knowledge_open.size() + 1;
  if (body_begin > framed.size() - tail.size() || framed[body_begin - 1] != ' ')
    throw PreconditionError("unframe_knowledge: malformed segment");
  Framed out;
  if (open > 0) {
    if (framed[open - 1] != '\n') throw PreconditionError("unframe_knowledge: malformed context separator");
    out.context = std::string(framed.substr(0, open - 1));
  }
  out.knowledge = std::string(framed.substr(body_begin, framed.size() - tail.size() - body_begin));
  return out;
}

}  // namespace seeker
