#include "seeker/taskgen.hpp"

#include <algorithm>
#include <charconv>

#include "seeker/errors.hpp"

namespace seeker {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string prefix_text(const Document& doc, std::size_t end) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < end; ++i) parts.push_back(escape_control_tokens(doc.sentences[i].text));
  return join(parts, " ");
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::SearchQuery: return "search_query";
    case TaskKind::Knowledge: return "knowledge";
    case TaskKind::Response: return "response";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view s) {
  if (s == "search_query") return TaskKind::SearchQuery;
  if (s == "knowledge") return TaskKind::Knowledge;
  if (s == "response") return TaskKind::Response;
  throw PreconditionError("unknown task kind: " + std::string(s));
}

void TaskGenConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(msmarco_f1_min) || !unit(mining_f1_min)) throw PreconditionError("F1 thresholds must lie in [0, 1]");
  if (min_knowledge_words < 1) throw PreconditionError("min_knowledge_words must be >= 1");
  if (candidate_pool < 1) throw PreconditionError("candidate_pool must be >= 1");
  tokens.validate();
}

std::optional<std::string> simplify_title(std::string_view title) {
  std::string stripped;
  int depth = 0;
  for (char c : title) {
    if (c == '(') {
      ++depth;
    } else if (c == ')' && depth > 0) {
      --depth;
    } else if (depth == 0) {
      stripped.push_back(c);
    }
  }
  if (auto dash = stripped.find(" - "); dash != std::string::npos) stripped.resize(dash);
  std::string out = join(split_whitespace(stripped), " ");
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<TrainingExample> build_lm_search_task(const Document& doc, std::size_t cut_sentence,
                                                    const ControlTokens& tokens) {
  if (cut_sentence < 1 || cut_sentence >= doc.sentences.size())
    throw PreconditionError("build_lm_search_task: cut must satisfy 1 <= cut < #sentences");
  auto title = simplify_title(doc.title);
  if (!title) return std::nullopt;
  TrainingExample ex;
  ex.kind = TaskKind::SearchQuery;
  ex.context = prefix_text(doc, cut_sentence) + " " + tokens.generate_query;
  ex.target = *title;
  ex.meta = {{"source", "lm_title"}, {"doc_id", doc.id}, {"cut_sentence", std::to_string(cut_sentence)}};
  return ex;
}

KnowledgeMining build_lm_knowledge_task(const Document& doc, std::size_t target_idx, const CorpusIndex& index,
                                        const TaskGenConfig& cfg) {
  if (target_idx >= doc.sentences.size()) throw PreconditionError("build_lm_knowledge_task: target_idx out of range");
  const std::string& target = doc.sentences[target_idx].text;
  KnowledgeMining out;
  out.mined = nearest_sentence(index, target, doc.id, cfg.candidate_pool);
  if (!out.mined) {
    out.rejected_by = "no_candidate";
    return out;
  }
  const auto& mined = *out.mined;
  if (mined.sentence.token_count < cfg.min_knowledge_words) {
    out.rejected_by = "min_words";
  } else if (mined.f1 < cfg.mining_f1_min) {
    out.rejected_by = "f1";
  } else if (cfg.require_shared_entity && !shared_entity(mined.sentence.text, target)) {
    out.rejected_by = "shared_entity";
  }
  if (!out.rejected_by.empty()) return out;

  const Document* source = index.find(mined.sentence.doc_id);
  const std::string prefix = prefix_text(doc, target_idx);
  TrainingExample ex;
  ex.kind = TaskKind::Knowledge;
  ex.context = prefix;
  ex.target = mined.sentence.text;
  ex.docs.push_back(Document::make(doc.id + "#prefix", doc.url, doc.title, prefix));
  ex.docs.push_back(*source);
  ex.meta = {{"source", "lm_mining"},
             {"doc_id", doc.id},
             {"target_idx", std::to_string(target_idx)},
             {"mined_doc", mined.sentence.doc_id},
             {"mined_sentence", std::to_string(mined.sentence.index)},
             {"mined_words", std::to_string(mined.sentence.token_count)},
             {"f1", fmt_double(mined.f1)},
             {"f1_min", fmt_double(cfg.mining_f1_min)},
             {"min_words", std::to_string(cfg.min_knowledge_words)},
             {"shared_entity", cfg.require_shared_entity ? "required" : "not_required"}};
  out.example = std::move(ex);
  return out;
}

std::optional<TrainingExample> build_lm_knowledge_title_task(const TrainingExample& knowledge_example,
                                                             const CorpusIndex& index, const ControlTokens& tokens) {
  auto it = knowledge_example.meta.find("mined_doc");
  if (it == knowledge_example.meta.end()) return std::nullopt;
  const Document* source = index.find(it->second);
  if (!source) return std::nullopt;
  auto title = simplify_title(source->title);
  if (!title) return std::nullopt;
  TrainingExample ex;
  ex.kind = TaskKind::SearchQuery;
  ex.context = knowledge_example.context.empty() ? tokens.generate_query
                                                 : knowledge_example.context + " " + tokens.generate_query;
  ex.target = *title;
  ex.meta = {{"source", "lm_knowledge_title"}, {"doc_id", knowledge_example.meta.at("doc_id")},
             {"mined_doc", source->id}};
  return ex;
}

TrainingExample build_lm_response_task(const Document& doc, std::size_t target_idx, std::string_view knowledge,
                                       const ControlTokens& tokens) {
  if (trim(knowledge).empty()) throw PreconditionError("build_lm_response_task: knowledge must be non-empty");
  if (target_idx >= doc.sentences.size()) throw PreconditionError("build_lm_response_task: target_idx out of range");
  TrainingExample ex;
  ex.kind = TaskKind::Response;
  ex.context = frame_knowledge(prefix_text(doc, target_idx), escape_control_tokens(knowledge, tokens), tokens);
  ex.target = doc.sentences[target_idx].text;
  ex.meta = {{"source", "lm_response"}, {"doc_id", doc.id}, {"target_idx", std::to_string(target_idx)}};
  return ex;
}

std::optional<RemappedTarget> remap_extractive_target(std::string_view answer,
                                                      const std::vector<std::string>& input_sentences,
                                                      double f1_min) {
  if (!(f1_min >= 0.0 && f1_min <= 1.0)) throw PreconditionError("remap: f1_min must lie in [0, 1]");
  const auto gold = normalize(answer);
  std::optional<RemappedTarget> best;
  for (std::size_t i = 0; i < input_sentences.size(); ++i) {
    const double f1 = f1_overlap(normalize(input_sentences[i]), gold);
    if (!best || f1 > best->f1) best = RemappedTarget{input_sentences[i], f1, i};
  }
  if (!best || best->f1 < f1_min) return std::nullopt;
  return best;
}

TrainingExample build_dialogue_knowledge_example(std::string_view dialogue_context, std::string_view gold_knowledge,
                                                 std::vector<Document> docs) {
  if (trim(gold_knowledge).empty()) throw PreconditionError("dialogue knowledge example: empty gold knowledge");
  if (!docs.empty() && std::none_of(docs.begin(), docs.end(), [&](const Document& d) {
        return d.content.find(gold_knowledge) != std::string::npos;
      }))
    throw PreconditionError("dialogue knowledge example: gold knowledge is not a span of any attached document");
  TrainingExample ex;
  ex.kind = TaskKind::Knowledge;
  ex.context = escape_control_tokens(dialogue_context);
  ex.target = std::string(gold_knowledge);
  ex.docs = std::move(docs);
  ex.meta = {{"source", "dialogue"}};
  return ex;
}

TrainingExample build_dialogue_response_example(std::string_view dialogue_context, std::string_view gold_knowledge,
                                                std::string_view gold_response, const ControlTokens& tokens) {
  if (trim(dialogue_context).empty() || trim(gold_knowledge).empty() || trim(gold_response).empty())
    throw PreconditionError("dialogue response example: all inputs must be non-empty");
  TrainingExample ex;
  ex.kind = TaskKind::Response;
  ex.context = frame_knowledge(escape_control_tokens(dialogue_context, tokens),
                               escape_control_tokens(gold_knowledge, tokens), tokens);
  ex.target = std::string(gold_response);
  ex.meta = {{"source", "dialogue"}};
  return ex;
}

std::optional<std::string> entity_knowledge_target(std::string_view context, std::string_view response) {
  for (const auto& e : extract_entities(response, context)) {
    if (context.find(e.surface) != std::string_view::npos) return e.surface;
  }
  return std::nullopt;
}

std::vector<std::string> sample_dialogue_history(const std::vector<std::string>& pool, std::size_t count,
                                                 std::mt19937_64& rng) {
  count = std::min(count, pool.size());
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates with modulo reduction, reproducible across standard libraries.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(pool[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

Json example_to_json(const TrainingExample& ex) {
  Json j;
  j["kind"] = std::string(to_string(ex.kind));
  j["context"] = ex.context;
  j["target"] = ex.target;
  Json docs = Json::array();
  for (const auto& d : ex.docs) docs.push_back(document_to_json(d));
  j["docs"] = std::move(docs);
  Json meta = Json::object();
  for (const auto& [k, v] : ex.meta) meta[k] = v;
  j["meta"] = std::move(meta);
  return j;
}

TrainingExample example_from_json(const Json& j) {
  TrainingExample ex;
  ex.kind = parse_task_kind(j.at("kind").get<std::string>());
  ex.context = j.at("context").get<std::string>();
  ex.target = j.at("target").get<std::string>();
  for (const auto& d : j.value("docs", Json::array())) ex.docs.push_back(document_from_json(d));
  const Json meta = j.value("meta", Json::object());
  for (const auto& [k, v] : meta.items()) ex.meta[k] = v.get<std::string>();
  return ex;
}

std::size_t serialize_examples(const std::vector<TrainingExample>& examples, const std::filesystem::path& path) {
  std::vector<Json> rows;
  rows.reserve(examples.size());
  for (const auto& ex : examples) rows.push_back(example_to_json(ex));
  return write_jsonl(path, rows);
}

std::vector<TrainingExample> deserialize_examples(const std::filesystem::path& path) {
  std::vector<TrainingExample> out;
  for_each_jsonl(path, [&](const Json& j) { out.push_back(example_from_json(j)); });
  return out;
}

// ---------------------------------------------------------------------------
// Batch drivers

LmTaskKinds parse_lm_task_kinds(std::string_view csv) {
  LmTaskKinds kinds{false, false, false};
  std::string s(csv);
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  for (const auto& k : split_whitespace(s)) {
    if (k == "search") kinds.search = true;
    else if (k == "knowledge") kinds.knowledge = true;
    else if (k == "response") kinds.response = true;
    else throw PreconditionError("unknown task kind '" + k + "' (expected search, knowledge, response)");
  }
  return kinds;
}

std::vector<TrainingExample> generate_lm_tasks(const CorpusIndex& index, const TaskGenConfig& cfg,
                                               std::uint64_t seed, LmTaskKinds kinds) {
  cfg.validate();
  std::vector<TrainingExample> out;
  for (const auto& doc : index.documents()) {
    const std::size_t n = doc.sentences.size();
    if (n < 2) continue;
    const std::uint64_t draw = splitmix64(seed ^ fnv1a(doc.id));
    const std::size_t cut = 1 + static_cast<std::size_t>(draw % (n - 1));
    auto tag = [&](TrainingExample& ex) {
      ex.meta["seed"] = std::to_string(seed);
      ex.meta["cut_sentence"] = std::to_string(cut);
    };
    if (kinds.search) {
      if (auto ex = build_lm_search_task(doc, cut, cfg.tokens)) {
        tag(*ex);
        out.push_back(std::move(*ex));
      }
    }
    if (!kinds.knowledge && !kinds.response) continue;
    auto mining = build_lm_knowledge_task(doc, cut, index, cfg);
    if (!mining.example) continue;
    if (kinds.knowledge) {
      tag(*mining.example);
      out.push_back(*mining.example);
      if (kinds.search) {
        if (auto title = build_lm_knowledge_title_task(*mining.example, index, cfg.tokens)) {
          tag(*title);
          out.push_back(std::move(*title));
        }
      }
    }
    if (kinds.response) {
      auto resp = build_lm_response_task(doc, cut, mining.example->target, cfg.tokens);
      tag(resp);
      out.push_back(std::move(resp));
    }
  }
  return out;
}

std::vector<AbstractiveQaRecord> load_abstractive_qa(const std::filesystem::path& path) {
  std::vector<AbstractiveQaRecord> out;
  for_each_jsonl(path, [&](const Json& j) {
    AbstractiveQaRecord r;
    r.query = j.at("query").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    std::size_t i = 0;
    for (const auto& p : j.value("passages", Json::array())) {
      const std::string fallback_id = "passage-" + std::to_string(out.size()) + "-" + std::to_string(i++);
      if (p.is_string()) {
        r.passages.push_back(Document::make(fallback_id, "", "", p.get<std::string>()));
      } else {
        r.passages.push_back(Document::make(p.value("id", fallback_id), p.value("url", std::string{}),
                                            p.value("title", std::string{}), p.at("text").get<std::string>()));
      }
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<TrainingExample> remap_abstractive_qa(const std::vector<AbstractiveQaRecord>& records, double f1_min,
                                                  bool with_response, RemapStats* stats,
                                                  const ControlTokens& tokens) {
  std::vector<TrainingExample> out;
  RemapStats local;
  for (const auto& r : records) {
    ++local.seen;
    std::vector<std::string> sentences;
    for (const auto& p : r.passages) {
      for (const auto& s : p.sentences) sentences.push_back(s.text);
    }
    auto remapped = remap_extractive_target(r.answer, sentences, f1_min);
    if (!remapped) continue;
    ++local.retained;
    TrainingExample k = build_dialogue_knowledge_example(r.query, remapped->sentence, r.passages);
    k.meta = {{"source", "abstractive_qa"}, {"f1", fmt_double(remapped->f1)}, {"f1_min", fmt_double(f1_min)},
              {"sentence_index", std::to_string(remapped->index)}};
    out.push_back(std::move(k));
    if (with_response && !trim(r.answer).empty() && !trim(r.query).empty()) {
      TrainingExample resp = build_dialogue_response_example(r.query, remapped->sentence, r.answer, tokens);
      resp.meta = {{"source", "abstractive_qa"}};
      out.push_back(std::move(resp));
    }
  }
  if (stats) *stats = local;
  return out;
}

std::vector<DialogueRecord> load_dialogue_records(const std::filesystem::path& path) {
  std::vector<DialogueRecord> out;
  for_each_jsonl(path, [&](const Json& j) {
    DialogueRecord r;
    r.context = j.at("context").get<std::string>();
    r.gold_knowledge = j.value("gold_knowledge", std::string{});
    r.gold_response = j.value("gold_response", std::string{});
    for (const auto& d : j.value("docs", Json::array())) r.docs.push_back(document_from_json(d));
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace seeker
