#include "seeker/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "seeker/errors.hpp"

namespace seeker {

namespace {

// Sum after sorting, so means do not depend on input order.
double stable_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pipe_row(const std::vector<std::string>& cells) { return join(cells, " | "); }

}  // namespace

EvalReport eval_generations(const std::vector<std::string>& preds, const std::vector<GoldExample>& golds,
                            GenerationBackend* scorer) {
  if (preds.size() != golds.size())
    throw PreconditionError("eval_generations: " + std::to_string(preds.size()) + " predictions for " +
                            std::to_string(golds.size()) + " gold examples");
  if (preds.empty()) throw PreconditionError("eval_generations: no predictions");
  EvalReport report;
  report.n = preds.size();
  std::vector<double> f1s, kf1s;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto pred = normalize(preds[i]);
    f1s.push_back(f1_overlap(pred, normalize(golds[i].gold_response)));
    if (golds[i].gold_knowledge.empty()) {
      ++report.kf1_missing;
      kf1s.push_back(0.0);
    } else {
      kf1s.push_back(f1_overlap(pred, normalize(join(golds[i].gold_knowledge, " "))));
    }
  }
  report.f1 = stable_mean(std::move(f1s));
  report.kf1 = stable_mean(std::move(kf1s));
  if (scorer && scorer->supports_scoring()) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& g : golds) pairs.emplace_back(g.context, g.gold_response);
    report.ppl = perplexity(*scorer, pairs);
  }
  return report;
}

double perplexity(GenerationBackend& backend, const std::vector<std::pair<std::string, std::string>>& examples) {
  if (!backend.supports_scoring()) throw CapabilityError(backend.name() + " does not support scoring");
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const auto& [context, target] : examples) {
    PackedInput input;
    input.style = PackingStyle::Prepend;
    input.context = context;
    input.flat_text = context;
    auto s = backend.score(input, target);
    if (!s) throw CapabilityError(backend.name() + " declined to score");
    nll += s->nll;
    tokens += s->token_count;
  }
  if (tokens == 0) throw PreconditionError("perplexity: zero scored tokens");
  return std::exp(nll / static_cast<double>(tokens));
}

// ---------------------------------------------------------------------------

std::string topical_prompt_text(std::string_view topic) {
  return "In recent developments, we have learned the following about " + std::string(topic) + ".";
}

std::vector<TopicalPrompt> build_topical_prompts(const std::vector<std::string>& topics) {
  std::vector<TopicalPrompt> out;
  for (const auto& t : topics) {
    if (to_lower_ascii(t).find("covid") != std::string::npos) continue;
    out.push_back(TopicalPrompt{t, topical_prompt_text(t)});
  }
  return out;
}

// ---------------------------------------------------------------------------

TurnSummary summarize_turn_counts(std::string model, const TurnCounts& c) {
  TurnSummary s;
  s.model = std::move(model);
  s.counts = c;
  s.consistent = pct(c.consistent, c.n);
  s.knowledgeable = pct(c.knowledgeable, c.n);
  s.factually_incorrect = pct(c.factually_incorrect, c.n);
  s.engaging = pct(c.engaging, c.n);
  s.knowledgeable_and_engaging = pct(c.knowledgeable_and_engaging, c.n);
  if (c.knowledgeable > 0) s.engaging_given_knowledgeable = pct(c.knowledgeable_and_engaging, c.knowledgeable);
  return s;
}

std::vector<TurnSummary> aggregate_turn_annotations(
    const std::vector<std::pair<std::string, TurnAnnotation>>& records) {
  std::vector<std::string> order;
  std::map<std::string, TurnCounts> counts;
  for (const auto& [model, a] : records) {
    auto [it, inserted] = counts.try_emplace(model);
    if (inserted) order.push_back(model);
    TurnCounts& c = it->second;
    ++c.n;
    c.consistent += a.consistent;
    c.knowledgeable += a.knowledgeable;
    c.factually_incorrect += a.factually_incorrect;
    c.engaging += a.engaging;
    c.knowledgeable_and_engaging += a.knowledgeable && a.engaging;
  }
  std::vector<TurnSummary> out;
  for (const auto& m : order) out.push_back(summarize_turn_counts(m, counts[m]));
  return out;
}

std::vector<CompletionSummary> aggregate_completion_annotations(
    const std::vector<std::pair<std::string, CompletionAnnotation>>& records) {
  struct Counts {
    std::size_t n = 0, sensible = 0, true_info = 0, hallucination = 0, topical = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Counts> counts;
  for (const auto& [model, a] : records) {
    auto [it, inserted] = counts.try_emplace(model);
    if (inserted) order.push_back(model);
    Counts& c = it->second;
    ++c.n;
    c.sensible += a.sensible;
    c.true_info += a.true_info;
    c.hallucination += a.hallucination;
    c.topical += a.topical;
  }
  std::vector<CompletionSummary> out;
  for (const auto& m : order) {
    const Counts& c = counts[m];
    out.push_back(CompletionSummary{m, c.n, pct(c.sensible, c.n), pct(c.true_info, c.n), pct(c.hallucination, c.n),
                                    pct(c.topical, c.n)});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_percent(std::optional<double> p, int decimals) {
  if (!p) return "-";
  return fixed(*p, decimals) + "%";
}

std::string format_turn_row(const TurnSummary& s) {
  return pipe_row({s.model, format_percent(s.consistent), format_percent(s.knowledgeable),
                   format_percent(s.factually_incorrect), format_percent(s.engaging),
                   format_percent(s.knowledgeable_and_engaging), format_percent(s.engaging_given_knowledgeable)});
}

std::string format_turn_table(const std::vector<TurnSummary>& rows) {
  std::string out = pipe_row({"Model", "Consistent", "Knowl.", "Factually Incorrect", "Per-Turn Engaging",
                              "Knowl. & Engaging", "% Knowl. is Engaging"}) +
                    "\n";
  for (const auto& r : rows) out += format_turn_row(r) + "\n";
  return out;
}

std::string format_completion_row(const CompletionSummary& s) {
  return pipe_row({s.model, format_percent(s.sensible, 0), format_percent(s.true_info, 0),
                   format_percent(s.hallucination, 0), format_percent(s.topical, 0)});
}

std::string format_completion_table(const std::vector<CompletionSummary>& rows) {
  std::string out = pipe_row({"Model", "Sensible", "True", "Hallucination", "Topical"}) + "\n";
  for (const auto& r : rows) out += format_completion_row(r) + "\n";
  return out;
}

std::string format_eval_row(std::string_view model, const EvalReport& r) {
  return pipe_row({std::string(model), r.ppl ? fixed(*r.ppl, 1) : "-", fixed(100.0 * r.f1, 1),
                   fixed(100.0 * r.kf1, 1)});
}

std::string format_eval_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::string out = pipe_row({"Model", "PPL", "F1", "KF1"}) + "\n";
  for (const auto& [m, r] : rows) out += format_eval_row(m, r) + "\n";
  return out;
}

Json eval_report_to_json(const EvalReport& r) {
  Json j;
  j["n"] = r.n;
  j["f1"] = r.f1;
  j["kf1"] = r.kf1;
  j["ppl"] = r.ppl ? Json(*r.ppl) : Json(nullptr);
  j["kf1_missing"] = r.kf1_missing;
  return j;
}

Json turn_summary_to_json(const TurnSummary& s) {
  Json j;
  j["model"] = s.model;
  j["n"] = s.counts.n;
  j["consistent"] = s.consistent;
  j["knowledgeable"] = s.knowledgeable;
  j["factually_incorrect"] = s.factually_incorrect;
  j["engaging"] = s.engaging;
  j["knowledgeable_and_engaging"] = s.knowledgeable_and_engaging;
  j["engaging_given_knowledgeable"] =
      s.engaging_given_knowledgeable ? Json(*s.engaging_given_knowledgeable) : Json(nullptr);
  j["mean_rating"] = s.mean_rating ? Json(*s.mean_rating) : Json(nullptr);
  return j;
}

Json turn_annotation_to_json(const TurnAnnotation& a) {
  Json j;
  j["consistent"] = a.consistent;
  j["knowledgeable"] = a.knowledgeable;
  j["factually_incorrect"] = a.factually_incorrect;
  j["engaging"] = a.engaging;
  return j;
}

TurnAnnotation turn_annotation_from_json(const Json& j) {
  TurnAnnotation a;
  a.consistent = j.at("consistent").get<bool>();
  a.knowledgeable = j.at("knowledgeable").get<bool>();
  a.factually_incorrect = j.at("factually_incorrect").get<bool>();
  a.engaging = j.at("engaging").get<bool>();
  return a;
}

std::vector<GoldExample> load_gold_jsonl(const std::filesystem::path& path) {
  std::vector<GoldExample> out;
  for_each_jsonl(path, [&](const Json& j) {
    GoldExample g;
    g.context = j.value("context", std::string{});
    g.gold_response = j.at("gold_response").get<std::string>();
    if (trim(g.gold_response).empty()) throw IoError(path.string() + ": empty gold_response");
    if (j.contains("gold_knowledge")) {
      const auto& k = j.at("gold_knowledge");
      if (k.is_string()) {
        if (!k.get<std::string>().empty()) g.gold_knowledge.push_back(k.get<std::string>());
      } else {
        g.gold_knowledge = k.get<std::vector<std::string>>();
      }
    }
    if (j.contains("gold_docs")) {
      std::vector<Document> docs;
      for (const auto& d : j.at("gold_docs")) docs.push_back(document_from_json(d));
      g.gold_docs = std::move(docs);
    }
    out.push_back(std::move(g));
  });
  return out;
}

std::vector<std::string> load_predictions_jsonl(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for_each_jsonl(path, [&](const Json& j) {
    if (j.is_string()) out.push_back(j.get<std::string>());
    else if (j.contains("text")) out.push_back(j.at("text").get<std::string>());
    else out.push_back(j.at("response").get<std::string>());
  });
  return out;
}

}  // namespace seeker
