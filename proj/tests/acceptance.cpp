// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "seeker/backends.hpp"
#include "seeker/errors.hpp"
#include "seeker/evalharness.hpp"
#include "seeker/pipeline.hpp"
#include "seeker/service.hpp"
#include "seeker/taskgen.hpp"
#include "seeker/textops.hpp"

using namespace seeker;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string last_line(std::string_view text) {
  const auto nl = text.rfind('\n');
  return std::string(nl == std::string_view::npos ? text : text.substr(nl + 1));
}

// Random text mixing case, punctuation, articles and repeated words.
std::string noisy_text(std::mt19937_64& rng, const std::vector<std::string>& vocab) {
  static const std::vector<std::string> extras = {"the", "a", "an", "The", "A", "An", "THE", "it's", "U.S.", "--"};
  static const std::string punct = ",.;:!?'\"()-";
  std::string out;
  for (std::size_t n = rng() % 16; n > 0; --n) {
    std::string w = rng() % 5 == 0 ? extras[rng() % extras.size()] : vocab[rng() % vocab.size()];
    if (rng() % 4 == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (rng() % 5 == 0) w += punct[rng() % punct.size()];
    if (!out.empty()) out += rng() % 6 == 0 ? "  " : " ";
    out += w;
  }
  return out;
}

Outcome f1_oracle_equivalence() {
  fixtures::WordGen gen(101);
  const auto vocab = gen.vocabulary(25);
  auto& rng = gen.rng();
  const int pairs = 5000;
  std::size_t mismatches = 0;
  double worst = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < pairs; ++i) {
    const std::string p = noisy_text(rng, vocab), g = noisy_text(rng, vocab);
    const double diff = std::abs(f1_overlap(p, g) - oracle::f1(p, g));
    worst = std::max(worst, diff);
    if (diff > 1e-12) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 5.0,
          fmt("%d pairs, %zu mismatches, max |diff| %.3g, %.2fs (limit 5s)", pairs, mismatches, worst, secs)};
}

Outcome worked_values() {
  const double obama = f1_overlap("obama born hawaii", "obama was born in hawaii");
  const auto costs = remap_extractive_target("yes it costs ten dollars", {"the price is ten dollars"}, 0.0);
  const auto costs_cut = remap_extractive_target("yes it costs ten dollars", {"the price is ten dollars"}, 0.5);
  const auto paris = remap_extractive_target("the capital of france is paris",
                                             {"paris is the capital of france", "berlin is in germany"}, 0.0);
  const bool ok = obama == 0.75 && costs && costs->f1 == 4.0 / 9.0 && !costs_cut && paris && paris->index == 0 &&
                  paris->f1 == 1.0;
  return {ok, fmt("obama=%.17g remap=%.17g (4/9=%.17g) cut_at_0.5=%s paris=%.3g", obama, costs ? costs->f1 : -1.0,
                  4.0 / 9.0, costs_cut ? "kept" : "dropped", paris ? paris->f1 : -1.0)};
}

// An answer/sentence pair whose token F1 is exactly 2*common/(answer + sentence).
std::pair<std::string, std::string> planted_pair(fixtures::WordGen& gen, std::size_t answer_len,
                                                 std::size_t sentence_len, std::size_t common) {
  std::vector<std::string> answer, sentence;
  for (std::size_t i = 0; i < answer_len; ++i) answer.push_back(gen.word());
  for (std::size_t i = 0; i < common; ++i) sentence.push_back(answer[i]);
  while (sentence.size() < sentence_len) sentence.push_back(gen.word());
  return {join(answer, " "), join(sentence, " ") + "."};
}

Outcome threshold_semantics() {
  fixtures::WordGen gen(202);
  struct Plant {
    double f1;
    std::size_t a, s, c;
  };
  const std::vector<Plant> plants = {{0.3, 10, 10, 3}, {0.44, 25, 25, 11}, {0.5, 4, 4, 2}, {0.9, 10, 10, 9}};
  std::vector<AbstractiveQaRecord> records;
  std::vector<double> planted;
  std::size_t bad_plants = 0;
  for (int r = 0; r < 200; ++r) {
    const auto& p = plants[gen.rng()() % plants.size()];
    auto [answer, sentence] = planted_pair(gen, p.a, p.s, p.c);
    if (oracle::f1(sentence, answer) != p.f1) ++bad_plants;
    records.push_back({"query " + std::to_string(r), answer,
                       {Document::make("p" + std::to_string(r), "", "", gen.word() + " " + gen.word() + ". " + sentence)}});
    planted.push_back(p.f1);
  }
  RemapStats stats;
  const auto kept = remap_abstractive_qa(records, 0.5, false, &stats);
  std::multiset<std::string> expected, got;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (planted[i] >= 0.5) expected.insert(records[i].answer);
  std::size_t mismatched_targets = 0;
  for (const auto& ex : kept) {
    // The retained target must be the planted sentence (the decoy sentence shares nothing).
    bool found = false;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].passages[0].sentences.back().text == ex.target) {
        got.insert(records[i].answer);
        found = true;
      }
    if (!found) ++mismatched_targets;
  }
  const bool ok = bad_plants == 0 && mismatched_targets == 0 && got == expected && stats.retained == expected.size() &&
                  stats.seen == records.size();
  return {ok, fmt("%zu records, planted >=0.5: %zu, retained %zu, wrong targets %zu, bad plants %zu", records.size(),
                  expected.size(), stats.retained, mismatched_targets, bad_plants)};
}

Outcome mining_oracle_equivalence() {
  fixtures::WordGen gen(303);
  auto docs = fixtures::synthetic_corpus(303, {.docs = 200});
  auto& rng = gen.rng();
  // Choose targets, then plant a perturbed copy of half of them in another document
  // so that the filters have something to accept.
  std::vector<std::pair<std::size_t, std::size_t>> targets;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = rng() % docs.size();
    targets.push_back({d, rng() % docs[d].sentences.size()});
  }
  std::map<std::size_t, std::string> appended;
  for (std::size_t t = 0; t < targets.size(); t += 2) {
    const auto [d, s] = targets[t];
    std::size_t host = rng() % docs.size();
    if (host == d) host = (host + 1) % docs.size();
    appended[host] += " " + fixtures::perturb(docs[d].sentences[s].text, 1 + rng() % 3, gen);
  }
  for (const auto& [host, extra] : appended) {
    const auto& old = docs[host];
    docs[host] = Document::make(old.id, old.url, old.title, old.content + extra);
  }
  const CorpusIndex index = CorpusIndex::build(docs);
  const TaskGenConfig cfg;

  const auto t0 = Clock::now();
  std::size_t agree = 0, emitted = 0, filter_violations = 0;
  for (const auto& [d, s] : targets) {
    const auto& doc = index.documents()[d];
    const auto& target = doc.sentences[s].text;
    const auto mining = build_lm_knowledge_task(doc, s, index, cfg);
    const auto expected = oracle::nearest_exhaustive(index, target, doc.id);
    const bool same = (!mining.mined && !expected) ||
                      (mining.mined && expected && mining.mined->sentence.doc_id == expected->doc_id &&
                       mining.mined->sentence.index == expected->index && mining.mined->f1 == expected->f1);
    if (same) ++agree;
    if (mining.example) {
      ++emitted;
      const auto& knowledge = mining.example->target;
      const bool ok = oracle::normalize(knowledge).size() >= 5 && oracle::f1(knowledge, target) >= 0.33 &&
                      shared_entity(knowledge, target);
      if (!ok) ++filter_violations;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = agree == targets.size() && filter_violations == 0 && emitted > 0 && secs < 60.0;
  return {ok, fmt("%zu/%zu targets agree with the exhaustive scan, %zu emitted, %zu filter violations, %.2fs "
                  "(limit 60s)",
                  agree, targets.size(), emitted, filter_violations, secs)};
}

// Independent check of a decoded string against a spec and the raw banned sources.
bool oracle_accepts(const std::string& text, const DecodingSpec& spec, const std::set<std::vector<std::string>>& banned) {
  const auto toks = oracle::normalize(text);
  if (toks.size() < spec.min_length) return false;
  if (spec.block_n == 0) return true;
  const auto own = toks.size() >= spec.block_n ? oracle::grams(toks, spec.block_n) : std::set<std::vector<std::string>>{};
  for (const auto& g : own)
    if (banned.count(g)) return false;
  if (spec.block_sources.count(BlockSource::SelfGenerated)) {
    const std::size_t windows = toks.size() >= spec.block_n ? toks.size() - spec.block_n + 1 : 0;
    if (own.size() != windows) return false;
  }
  return true;
}

Outcome constrained_decoding() {
  fixtures::WordGen gen(404);
  const auto vocab = gen.vocabulary(12);
  auto& rng = gen.rng();
  std::vector<std::string> hyps;
  FunctionBackend backend([&](const PackedInput&, const DecodingSpec&, const NGramSet&) { return hyps; });
  const DefaultSpecs defaults;
  const std::vector<std::pair<std::string, DecodingSpec>> specs = {
      {"search", defaults.search}, {"knowledge", defaults.knowledge}, {"response", defaults.response}};
  std::string detail;
  bool ok = true;
  for (const auto& [name, spec] : specs) {
    std::size_t violations = 0, short_outputs = 0, wrong_choice = 0, decoded = 0, rejected = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      hyps.clear();
      for (std::size_t h = 1 + rng() % 10; h > 0; --h) {
        std::vector<std::string> w;
        for (std::size_t n = rng() % 30; n > 0; --n) w.push_back(vocab[rng() % vocab.size()]);
        hyps.push_back(join(w, " "));
      }
      std::vector<std::string> sources;
      for (std::size_t s = rng() % 4; s > 0; --s) {
        std::vector<std::string> w;
        for (std::size_t n = 3 + rng() % 10; n > 0; --n) w.push_back(vocab[rng() % vocab.size()]);
        sources.push_back(join(w, " "));
      }
      std::set<std::vector<std::string>> banned_oracle;
      if (spec.block_n > 0)
        for (const auto& s : sources)
          for (const auto& g : oracle::grams(oracle::normalize(s), spec.block_n)) banned_oracle.insert(g);
      const NGramSet banned = spec.block_n > 0 ? collect_banned_ngrams(sources, spec.block_n) : NGramSet{};

      std::optional<std::string> first_valid;
      for (const auto& h : hyps)
        if (oracle_accepts(h, spec, banned_oracle)) {
          first_valid = h;
          break;
        }
      try {
        const auto out = decode_with_constraints(backend, pack_fid("ctx", {}), spec, banned);
        ++decoded;
        if (oracle::normalize(out).size() < spec.min_length) ++short_outputs;
        if (!oracle_accepts(out, spec, banned_oracle)) ++violations;
        if (!first_valid || out != *first_valid) ++wrong_choice;
      } catch (const ConstraintError&) {
        ++rejected;
        if (first_valid) ++wrong_choice;
      }
    }
    ok = ok && violations == 0 && short_outputs == 0 && wrong_choice == 0 && decoded > 0 && rejected > 0;
    detail += fmt("%s(min %zu): %zu decoded/%zu rejected, %zu violations, %zu short, %zu wrong; ", name.c_str(),
                  spec.min_length, decoded, rejected, violations, short_outputs, wrong_choice);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

std::shared_ptr<const CorpusIndex> fixture_index() {
  static const auto index = std::make_shared<const CorpusIndex>(
      CorpusIndex::build(fixtures::synthetic_corpus(505, {.docs = 150, .min_words = 10, .max_words = 16})));
  return index;
}

// Response text made of tokens never seen before in the process.
std::string fresh_response() {
  static std::atomic<int> counter{0};
  const int n = counter++;
  std::string out = "reply";
  for (int i = 0; i < 22; ++i) out += " r" + std::to_string(n) + "q" + std::to_string(i);
  return out;
}

Outcome cross_turn_blocking() {
  fixtures::WordGen gen(606);
  const auto tiny_vocab = gen.vocabulary(8);
  auto& rng = gen.rng();
  const auto index = fixture_index();
  PipelineConfig cfg;
  cfg.search = std::make_shared<LocalIndexProvider>(index);

  ConversationState* current = nullptr;
  std::size_t first_blocked = 0;
  FunctionBackend backend([&](const PackedInput& in, const DecodingSpec&, const NGramSet&) {
    const std::string r = in.render();
    if (r.ends_with("__generate-query__")) {
      return std::vector<std::string>{current->turns.back().text};
    }
    if (r.ends_with("__endknowledge__")) return std::vector<std::string>{fresh_response()};
    // Candidates drawn from eight words overlap prior knowledge often; the
    // previous knowledge itself is offered first.
    std::vector<std::string> out;
    if (!current->accumulated_knowledge.empty()) out.push_back(current->accumulated_knowledge.back());
    for (int c = 0; c < 30; ++c) {
      std::vector<std::string> w;
      for (int i = 0; i < 12; ++i) w.push_back(tiny_vocab[rng() % tiny_vocab.size()]);
      out.push_back(join(w, " ") + ".");
    }
    return out;
  });

  std::size_t complete_sessions = 0, overlapping_pairs = 0, turns = 0;
  for (int s = 0; s < 100; ++s) {
    ConversationState state;
    current = &state;
    try {
      for (int t = 0; t < 5; ++t) {
        const auto& doc = index->documents()[rng() % index->documents().size()];
        const std::string user = doc.sentences[rng() % doc.sentences.size()].text;
        // The backend reads the pending user turn from a copy that already holds it.
        ConversationState probe = state;
        probe.turns.push_back({"user", escape_control_tokens(user)});
        current = &probe;
        const auto trace = run_turn(state, user, backend, cfg);
        current = &state;
        if (!probe.accumulated_knowledge.empty() && trace.knowledge != probe.accumulated_knowledge.back()) {
          ++first_blocked;
        }
        ++turns;
      }
      ++complete_sessions;
    } catch (const StageError&) {
      current = &state;
    }
    const auto& k = state.accumulated_knowledge;
    for (std::size_t i = 0; i < k.size(); ++i)
      for (std::size_t j = i + 1; j < k.size(); ++j)
        if (!oracle::trigram_disjoint(k[i], k[j])) ++overlapping_pairs;
  }
  const bool ok = complete_sessions == 100 && overlapping_pairs == 0;
  return {ok, fmt("%zu/100 sessions completed 5 turns (%zu turns), %zu overlapping knowledge pairs, "
                  "repeated knowledge rejected %zu times",
                  complete_sessions, turns, overlapping_pairs, first_blocked)};
}

// Returns, for the knowledge stage, every sentence of the packed documents ranked
// by overlap with the last user turn. The other stages echo the user turn as the
// query and answer with fresh tokens.
class CopyOracleBackend final : public GenerationBackend {
 public:
  std::string name() const override { return "copy-oracle"; }

 protected:
  std::vector<std::string> do_generate(const PackedInput& in, const DecodingSpec&, const NGramSet&) override {
    const std::string r = in.render();
    const std::string query_token = "__generate-query__";
    if (r.ends_with(query_token)) {
      return {trim(last_line(std::string_view(r).substr(0, r.size() - query_token.size())))};
    }
    if (r.ends_with("__endknowledge__")) return {fresh_response()};
    const std::string user = last_line(in.context);
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& slot : in.slots)
      for (const auto& s : split_sentences(slot.body)) ranked.push_back({oracle::f1(s.text, user), s.text});
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::string> out;
    for (auto& [_, text] : ranked) out.push_back(std::move(text));
    return out;
  }
};

Outcome copy_property() {
  fixtures::WordGen gen(707);
  auto& rng = gen.rng();
  const auto index = fixture_index();
  PipelineConfig cfg;
  cfg.search = std::make_shared<LocalIndexProvider>(index);
  const std::vector<std::string> allowed = {"alpha.com", "gamma.net", "delta.co.uk"};
  cfg.allowlist = DomainAllowlist(allowed);
  cfg.k_docs = 5;
  CopyOracleBackend backend;

  std::size_t copied = 0, bounded = 0, allowlisted = 0, failures = 0, turns = 0;
  for (int s = 0; s < 20; ++s) {
    ConversationState state;
    for (int t = 0; t < 5; ++t) {
      ++turns;
      const auto& doc = index->documents()[rng() % index->documents().size()];
      const std::string user = fixtures::perturb(doc.sentences[rng() % doc.sentences.size()].text, 2, gen);
      try {
        const auto trace = run_turn(state, user, backend, cfg);
        if (trace.retrieved.size() <= 5) ++bounded;
        if (std::all_of(trace.retrieved.begin(), trace.retrieved.end(), [&](const Document& d) {
              return std::find(allowed.begin(), allowed.end(), d.domain) != allowed.end();
            }))
          ++allowlisted;
        if (std::any_of(trace.retrieved.begin(), trace.retrieved.end(), [&](const Document& d) {
              return d.content.find(trace.knowledge) != std::string::npos;
            }))
          ++copied;
      } catch (const StageError&) {
        ++failures;
      }
    }
  }
  const bool ok = turns == 100 && copied == 100 && bounded == 100 && allowlisted == 100;
  return {ok, fmt("%zu turns: %zu knowledge copied from a retrieved doc, %zu with <=5 docs, %zu fully allowlisted, "
                  "%zu stage failures",
                  turns, copied, bounded, allowlisted, failures)};
}

Outcome topical_prompts() {
  std::vector<std::string> topics;
  for (int i = 0; i < 100; ++i) topics.push_back("Topic number " + std::to_string(i));
  topics[17] = "COVID-19 booster rollout";
  topics[63] = "new covid rules";
  const auto prompts = build_topical_prompts(topics);
  std::size_t exact = 0;
  std::size_t j = 0;
  for (const auto& topic : topics) {
    if (topic.find("covid") != std::string::npos || topic.find("COVID") != std::string::npos) continue;
    if (j < prompts.size() && prompts[j].topic == topic &&
        prompts[j].prompt == "In recent developments, we have learned the following about " + topic + ".")
      ++exact;
    ++j;
  }
  const bool ok = prompts.size() == 98 && exact == 98;
  return {ok, fmt("100 topics -> %zu prompts, %zu bit-equal to the template", prompts.size(), exact)};
}

Outcome annotation_algebra() {
  std::mt19937_64 rng(808);
  std::size_t draws_ok = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    std::vector<std::pair<std::string, TurnAnnotation>> recs;
    std::map<std::string, TurnCounts> tally;
    for (std::size_t i = 1 + rng() % 60; i > 0; --i) {
      const std::string model = "m" + std::to_string(rng() % 3);
      const TurnAnnotation a{rng() % 2 == 0, rng() % 2 == 0, rng() % 2 == 0, rng() % 2 == 0};
      recs.push_back({model, a});
      auto& c = tally[model];
      ++c.n;
      c.consistent += a.consistent;
      c.knowledgeable += a.knowledgeable;
      c.factually_incorrect += a.factually_incorrect;
      c.engaging += a.engaging;
      c.knowledgeable_and_engaging += a.knowledgeable && a.engaging;
    }
    bool ok = true;
    const auto summaries = aggregate_turn_annotations(recs);
    ok = ok && summaries.size() == tally.size();
    for (const auto& s : summaries) {
      const auto& c = s.counts;
      ok = ok && tally.count(s.model) && c == tally.at(s.model);
      ok = ok && c.knowledgeable_and_engaging <= std::min(c.knowledgeable, c.engaging);
      if (c.knowledgeable > 0) {
        ok = ok && s.engaging_given_knowledgeable.has_value() &&
             std::abs(*s.engaging_given_knowledgeable / 100.0 * static_cast<double>(c.knowledgeable) -
                      static_cast<double>(c.knowledgeable_and_engaging)) < 1e-9;
      } else {
        ok = ok && !s.engaging_given_knowledgeable.has_value();
      }
    }
    draws_ok += ok;
  }
  TurnSummary fixture;
  fixture.model = "SeeKeR";
  fixture.consistent = 78.47;
  fixture.knowledgeable = 46.49;
  fixture.factually_incorrect = 3.94;
  fixture.engaging = 90.41;
  fixture.knowledgeable_and_engaging = 44.03;
  fixture.engaging_given_knowledgeable = 94.71;
  const std::string row = format_turn_row(fixture);
  const bool row_ok = row == "SeeKeR | 78.47% | 46.49% | 3.94% | 90.41% | 44.03% | 94.71%";
  return {draws_ok == 1000 && row_ok, fmt("%zu/1000 draws satisfy the identities; row \"%s\"", draws_ok, row.c_str())};
}

Outcome perplexity_hook() {
  auto scorer = fixtures::uniform_scorer(std::log(8.0));
  const double ppl = perplexity(*scorer, {{"ctx one", "alpha beta gamma"}, {"ctx two", "delta"}, {"c", "e f g h i j"}});
  return {std::abs(ppl - 8.0) <= 1e-9, fmt("ppl = %.15f (target 8 +/- 1e-9)", ppl)};
}

Outcome service_durability() {
  fixtures::TempDir tmp;
  auto backend = std::make_shared<CopyOracleBackend>();
  PipelineConfig cfg;
  cfg.search = std::make_shared<LocalIndexProvider>(fixture_index());
  std::map<std::string, PipelineProfile> profiles{{"default", PipelineProfile{cfg, backend}}};
  const auto& docs = fixture_index()->documents();

  std::string id;
  std::vector<Json> client_copies;
  {
    SessionStore store(tmp.path(), profiles);
    Service service(store, ServiceOptions{"127.0.0.1", 0, tmp.path() / "no-ui"});
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);
    auto res = client.Post("/sessions", "{}", "application/json");
    if (!res || res->status != 201) return {false, "session creation failed"};
    id = Json::parse(res->body)["session_id"];
    for (int t = 0; t < 3; ++t) {
      const Json body{{"text", docs[static_cast<std::size_t>(t) * 7].sentences[0].text}};
      res = client.Post("/sessions/" + id + "/messages", body.dump(), "application/json");
      if (!res || res->status != 200) return {false, fmt("turn %d failed with status %d", t, res ? res->status : -1)};
      client_copies.push_back(Json::parse(res->body));
    }
    service.stop();
  }
  SessionStore store(tmp.path(), profiles);
  Service service(store, ServiceOptions{"127.0.0.1", 0, tmp.path() / "no-ui"});
  const int port = service.start();
  httplib::Client client("127.0.0.1", port);
  const auto res = client.Get("/sessions/" + id + "/log");
  if (!res || res->status != 200) return {false, "log export failed after restart"};
  const auto records = parse_exported_log(res->body);
  std::size_t equal = 0;
  for (std::size_t i = 0; i < records.size() && i < client_copies.size(); ++i)
    equal += records[i].trace == client_copies[i] && records[i].turn_index == i;
  service.stop();
  return {records.size() == 3 && equal == 3,
          fmt("%zu records exported after restart, %zu equal to the client copies", records.size(), equal)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"f1-oracle-equivalence", f1_oracle_equivalence},
      {"worked-values", worked_values},
      {"threshold-semantics", threshold_semantics},
      {"mining-oracle-equivalence", mining_oracle_equivalence},
      {"constrained-decoding", constrained_decoding},
      {"cross-turn-knowledge-blocking", cross_turn_blocking},
      {"copy-property", copy_property},
      {"topical-prompts", topical_prompts},
      {"annotation-algebra", annotation_algebra},
      {"perplexity-hook", perplexity_hook},
      {"service-durability", service_durability},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << " | "
              << fmt("%.2fs", seconds_since(t0)) << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
