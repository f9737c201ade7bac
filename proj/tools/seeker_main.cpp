// Command-line front end: corpus indexing, task generation, evaluation,
// interactive chat, batch completion and the HTTP service.

#include <pthread.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "seeker/backends.hpp"
#include "seeker/config.hpp"
#include "seeker/corpus.hpp"
#include "seeker/errors.hpp"
#include "seeker/evalharness.hpp"
#include "seeker/json_io.hpp"
#include "seeker/pipeline.hpp"
#include "seeker/service.hpp"
#include "seeker/taskgen.hpp"

using namespace seeker;
namespace fs = std::filesystem;

namespace {

struct PipelineArgs {
  std::string config;
  std::string profile = "default";
  std::string backend;
  std::string script;
  std::string index;
  std::string allowlist;
  std::string date_suffix;
  bool allow_empty_retrieval = false;
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a) {
  cmd->add_option("--config", a.config, "key = value configuration file");
  cmd->add_option("--profile", a.profile, "profile section of the configuration");
  cmd->add_option("--backend", a.backend, "generation backend URL (token from $SEEKER_BACKEND_TOKEN)");
  cmd->add_option("--script", a.script, "scripted backend JSONL, for offline runs");
  cmd->add_option("--index", a.index, "local corpus index to search");
  cmd->add_option("--allowlist", a.allowlist, "domain allowlist file");
  cmd->add_option("--date-suffix", a.date_suffix, "text appended to every generated query");
  cmd->add_flag("--allow-empty-retrieval", a.allow_empty_retrieval,
                "continue without documents when the search provider fails");
}

struct Resolved {
  PipelineConfig config;
  std::shared_ptr<GenerationBackend> backend;
};

Resolved resolve_pipeline(const PipelineArgs& a) {
  ProfileSettings prof;
  if (!a.config.empty()) {
    const SeekerConfig cfg = load_config(a.config);
    auto it = cfg.profiles.find(a.profile);
    if (it == cfg.profiles.end()) throw PreconditionError("unknown profile " + a.profile);
    prof = it->second;
  }
  if (!a.backend.empty()) prof.backend_endpoint = a.backend;
  if (!a.index.empty()) {
    prof.search_provider = "local-index";
    prof.index_path = a.index;
  }
  if (!a.allowlist.empty()) prof.allowlist_path = a.allowlist;
  if (!a.date_suffix.empty()) prof.date_suffix = a.date_suffix;
  if (a.allow_empty_retrieval) prof.allow_empty_retrieval = true;

  Resolved r;
  r.config = build_pipeline_config(prof);
  if (!a.script.empty()) {
    r.backend = std::shared_ptr<GenerationBackend>(ScriptedBackend::from_jsonl(a.script));
  } else {
    r.backend = build_backend(prof);
  }
  return r;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void print_stage(const char* name, const std::string& text) { std::cout << "[" << name << "] " << text << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search, knowledge and response pipeline tools"};
  app.require_subcommand(1);

  // corpus -------------------------------------------------------------------
  auto* corpus = app.add_subcommand("corpus", "document index")->require_subcommand(1);
  std::string c_input, c_out, c_index, c_query;
  std::size_t c_k = 5;
  auto* c_build = corpus->add_subcommand("build", "index a {id, url, title, content} JSONL file");
  c_build->add_option("--input", c_input)->required();
  c_build->add_option("--out", c_out)->required();
  auto* c_search = corpus->add_subcommand("search", "BM25 search over an index");
  c_search->add_option("--index", c_index)->required();
  c_search->add_option("--query", c_query)->required();
  c_search->add_option("-k", c_k);

  // taskgen ------------------------------------------------------------------
  auto* taskgen = app.add_subcommand("taskgen", "fine-tuning example construction")->require_subcommand(1);
  std::string t_corpus, t_out, t_kinds = "search,knowledge,response", t_answers, t_input;
  std::uint64_t t_seed = 0;
  double t_f1_min = 0.5;
  bool t_with_response = false;
  auto* t_lm = taskgen->add_subcommand("lm", "language-modeling tasks over an indexed corpus");
  t_lm->add_option("--corpus", t_corpus)->required();
  t_lm->add_option("--out", t_out)->required();
  t_lm->add_option("--seed", t_seed)->required();
  t_lm->add_option("--kinds", t_kinds);
  auto* t_remap = taskgen->add_subcommand("remap", "extractive remapping of abstractive QA answers");
  t_remap->add_option("--answers", t_answers)->required();
  t_remap->add_option("--out", t_out)->required();
  t_remap->add_option("--f1-min", t_f1_min);
  t_remap->add_flag("--with-response", t_with_response, "also emit response examples");
  auto* t_dialogue = taskgen->add_subcommand("dialogue", "knowledge and response examples from grounded dialogue");
  t_dialogue->add_option("--input", t_input)->required();
  t_dialogue->add_option("--out", t_out)->required();

  // eval ---------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluation harness")->require_subcommand(1);
  std::string e_preds, e_gold, e_model = "model", e_report, e_topics, e_out, e_annotations, e_kind = "turn";
  std::string e_score_backend;
  auto* e_run = eval->add_subcommand("run", "F1, knowledge F1 and optional perplexity");
  e_run->add_option("--preds", e_preds)->required();
  e_run->add_option("--gold", e_gold)->required();
  e_run->add_option("--model", e_model);
  e_run->add_option("--report", e_report, "write the JSON report here");
  e_run->add_option("--score-backend", e_score_backend, "backend URL that can score, for perplexity");
  auto* e_topical = eval->add_subcommand("topical", "topical completion prompts from a topic list");
  e_topical->add_option("--topics", e_topics)->required();
  e_topical->add_option("--out", e_out)->required();
  auto* e_ann = eval->add_subcommand("annotations", "aggregate per-turn or per-completion flags");
  e_ann->add_option("--input", e_annotations)->required();
  e_ann->add_option("--kind", e_kind)->check(CLI::IsMember({"turn", "completion"}));

  // chat / complete / serve --------------------------------------------------
  PipelineArgs chat_args, complete_args;
  std::string trace_log, persona, p_prompts, p_out;
  auto* chat = app.add_subcommand("chat", "interactive dialogue loop");
  add_pipeline_options(chat, chat_args);
  chat->add_option("--trace-log", trace_log, "append one turn trace per line");
  chat->add_option("--persona", persona);
  auto* complete = app.add_subcommand("complete", "batch prompt completion");
  add_pipeline_options(complete, complete_args);
  complete->add_option("--prompts", p_prompts)->required();
  complete->add_option("--out", p_out)->required();

  std::string s_config, s_listen, s_data, s_ui, s_script;
  auto* serve = app.add_subcommand("serve", "HTTP chat and annotation service");
  serve->add_option("--config", s_config)->required();
  serve->add_option("--listen", s_listen, "host:port, overrides the config");
  serve->add_option("--data-dir", s_data);
  serve->add_option("--ui-dir", s_ui);
  serve->add_option("--script", s_script, "scripted backend for every profile");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_build->parsed()) {
      auto index = CorpusIndex::build(load_documents_jsonl(c_input));
      index.save(c_out);
      std::cout << "indexed " << index.documents().size() << " documents, " << index.sentence_count()
                << " sentences -> " << c_out << "\n";
    } else if (c_search->parsed()) {
      const auto index = CorpusIndex::load(c_index);
      for (const auto& hit : lexical_search(index, c_query, c_k)) {
        Json j{{"doc_id", hit.doc_id}, {"score", hit.score}};
        if (const Document* d = index.find(hit.doc_id)) {
          j["title"] = d->title;
          j["url"] = d->url;
          if (hit.matched_sentence) j["sentence"] = d->sentences.at(*hit.matched_sentence).text;
        }
        std::cout << j.dump() << "\n";
      }
    } else if (t_lm->parsed()) {
      const auto index = CorpusIndex::load(t_corpus);
      TaskGenConfig cfg;
      const auto examples = generate_lm_tasks(index, cfg, t_seed, parse_lm_task_kinds(t_kinds));
      serialize_examples(examples, t_out);
      std::cout << "wrote " << examples.size() << " examples -> " << t_out << "\n";
    } else if (t_remap->parsed()) {
      RemapStats stats;
      const auto examples = remap_abstractive_qa(load_abstractive_qa(t_answers), t_f1_min, t_with_response, &stats);
      serialize_examples(examples, t_out);
      std::cout << "retained " << stats.retained << " of " << stats.seen << " records -> " << t_out << "\n";
    } else if (t_dialogue->parsed()) {
      std::vector<TrainingExample> examples;
      std::size_t skipped = 0;
      for (const auto& r : load_dialogue_records(t_input)) {
        try {
          examples.push_back(build_dialogue_knowledge_example(r.context, r.gold_knowledge, r.docs));
          examples.push_back(build_dialogue_response_example(r.context, r.gold_knowledge, r.gold_response));
        } catch (const PreconditionError& e) {
          ++skipped;
          std::cerr << "skipped record: " << e.what() << "\n";
        }
      }
      serialize_examples(examples, t_out);
      std::cout << "wrote " << examples.size() << " examples (" << skipped << " records skipped) -> " << t_out
                << "\n";
    } else if (e_run->parsed()) {
      std::unique_ptr<GenerationBackend> scorer;
      if (!e_score_backend.empty()) {
        HttpBackendOptions opt;
        opt.endpoint = e_score_backend;
        if (const char* tok = std::getenv("SEEKER_BACKEND_TOKEN")) opt.auth_token = tok;
        opt.scoring = true;
        scorer = std::make_unique<HttpBackend>(opt);
      }
      const auto report = eval_generations(load_predictions_jsonl(e_preds), load_gold_jsonl(e_gold), scorer.get());
      if (!e_report.empty()) write_jsonl(e_report, {eval_report_to_json(report)});
      std::cout << eval_report_to_json(report).dump() << "\n" << format_eval_table({{e_model, report}});
      if (report.kf1_missing > 0)
        std::cerr << report.kf1_missing << " examples had no gold knowledge and scored 0 KF1\n";
    } else if (e_topical->parsed()) {
      const auto topics = read_lines(e_topics);
      const auto prompts = build_topical_prompts(topics);
      std::vector<Json> rows;
      for (const auto& p : prompts) rows.push_back(Json{{"topic", p.topic}, {"prompt", p.prompt}});
      write_jsonl(e_out, rows);
      std::cout << "wrote " << rows.size() << " prompts (" << topics.size() - rows.size() << " topics filtered) -> "
                << e_out << "\n";
    } else if (e_ann->parsed()) {
      if (e_kind == "turn") {
        std::vector<std::pair<std::string, TurnAnnotation>> rows;
        for_each_jsonl(e_annotations, [&](const Json& j) {
          rows.emplace_back(j.value("model", std::string{"model"}), turn_annotation_from_json(j));
        });
        std::cout << format_turn_table(aggregate_turn_annotations(rows));
      } else {
        std::vector<std::pair<std::string, CompletionAnnotation>> rows;
        for_each_jsonl(e_annotations, [&](const Json& j) {
          CompletionAnnotation a;
          a.sensible = j.at("sensible").get<bool>();
          a.true_info = j.at("true").get<bool>();
          a.hallucination = j.at("hallucination").get<bool>();
          a.topical = j.at("topical").get<bool>();
          rows.emplace_back(j.value("model", std::string{"model"}), a);
        });
        std::cout << format_completion_table(aggregate_completion_annotations(rows));
      }
    } else if (chat->parsed()) {
      auto r = resolve_pipeline(chat_args);
      ConversationState state;
      state.session_id = "cli";
      if (!persona.empty()) state.persona = persona;
      std::ofstream log;
      if (!trace_log.empty()) log.open(trace_log, std::ios::app);
      std::string line;
      std::cout << "> " << std::flush;
      while (std::getline(std::cin, line)) {
        if (trim(line).empty()) {
          std::cout << "> " << std::flush;
          continue;
        }
        try {
          const auto trace = run_turn(state, line, *r.backend, r.config);
          print_stage("search", trace.query);
          for (const auto& d : trace.retrieved) print_stage("doc", d.title + " <" + d.url + ">");
          print_stage("knowledge", trace.knowledge);
          print_stage("response", trace.response);
          if (log) log << trace_to_json(trace).dump() << "\n" << std::flush;
        } catch (const StageError& e) {
          std::cerr << "turn failed: " << e.what() << "\n";
        }
        std::cout << "> " << std::flush;
      }
    } else if (complete->parsed()) {
      auto r = resolve_pipeline(complete_args);
      std::vector<Json> out;
      std::size_t failed = 0;
      for_each_jsonl(p_prompts, [&](const Json& j) {
        const std::string prompt = j.is_string() ? j.get<std::string>() : j.at("prompt").get<std::string>();
        try {
          Json row = completion_to_json(complete_prompt(prompt, *r.backend, r.config));
          if (j.is_object() && j.contains("topic")) row["topic"] = j.at("topic");
          out.push_back(std::move(row));
        } catch (const StageError& e) {
          ++failed;
          out.push_back(Json{{"prompt", prompt}, {"error", e.what()}, {"stage", e.stage()}});
        }
      });
      write_jsonl(p_out, out);
      std::cout << "completed " << out.size() - failed << " of " << out.size() << " prompts -> " << p_out << "\n";
      return failed == 0 ? 0 : 1;
    } else if (serve->parsed()) {
      const SeekerConfig cfg = load_config(s_config);
      std::map<std::string, PipelineProfile> profiles;
      std::shared_ptr<GenerationBackend> scripted;
      if (!s_script.empty()) scripted = std::shared_ptr<GenerationBackend>(ScriptedBackend::from_jsonl(s_script));
      for (const auto& [name, prof] : cfg.profiles) {
        profiles[name] = PipelineProfile{build_pipeline_config(prof), scripted ? scripted : build_backend(prof)};
      }
      ServiceOptions opt;
      opt.host = cfg.listen_host;
      opt.port = cfg.listen_port;
      opt.ui_dir = s_ui.empty() ? cfg.ui_dir : fs::path(s_ui);
      if (!s_listen.empty()) {
        const auto colon = s_listen.rfind(':');
        if (colon == std::string::npos) throw PreconditionError("--listen must be host:port");
        opt.host = s_listen.substr(0, colon);
        opt.port = std::stoi(s_listen.substr(colon + 1));
      }
      SessionStore store(s_data.empty() ? cfg.data_dir : fs::path(s_data), std::move(profiles));
      Service service(store, opt);
      // Block the shutdown signals before the server thread exists so it inherits
      // the mask, then wait for them synchronously here.
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);
      const int port = service.start();
      std::cout << "listening on " << opt.host << ":" << port << std::endl;
      int sig = 0;
      sigwait(&set, &sig);
      service.stop();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
