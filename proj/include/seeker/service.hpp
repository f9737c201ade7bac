#pragma once

// Chat sessions over the pipeline, exposed as JSON-over-HTTP.
//
//   POST /sessions                           {config?}             -> {session_id}
//   GET  /sessions/{id}                                            -> {session_id, config, turns: [record]}
//   POST /sessions/{id}/messages             {text}                -> {turn_index, query, docs, knowledge, response, stage_timings}
//   PUT  /sessions/{id}/turns/{n}/annotation {consistent, knowledgeable, factually_incorrect, engaging}
//   GET  /sessions/{id}/turns/{n}/annotation
//   PUT  /sessions/{id}/rating               {value: 1..5}
//   GET  /sessions/{id}/log                  application/x-ndjson, one TurnRecord per line
//   GET  /annotations/summary                per-config aggregate of stored annotations
//
// Every session is an append-only JSONL event file under <data_dir>/sessions;
// sessions are replayed from those files at startup.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "seeker/evalharness.hpp"
#include "seeker/json_io.hpp"
#include "seeker/pipeline.hpp"

namespace httplib {
class Server;
}

namespace seeker {

struct PipelineProfile {
  PipelineConfig config;
  std::shared_ptr<GenerationBackend> backend;
};

struct TurnRecord {
  std::size_t turn_index = 0;
  std::string user_message;
  Json trace;  // exactly what the client received for this turn
  std::optional<TurnAnnotation> annotation;
  std::optional<int> final_rating;  // session-level, reported on the last record
};

Json turn_record_to_json(const TurnRecord& r);
TurnRecord turn_record_from_json(const Json& j);

/// Parses an exported log back into records.
std::vector<TurnRecord> parse_exported_log(std::string_view ndjson);

/// Annotated turns of the records, tagged with `model`, ready for aggregate_turn_annotations.
std::vector<std::pair<std::string, TurnAnnotation>> annotations_of(const std::string& model,
                                                                    const std::vector<TurnRecord>& records);

class SessionStore {
 public:
  /// Replays every session file found under data_dir.
  SessionStore(std::filesystem::path data_dir, std::map<std::string, PipelineProfile> profiles);
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  /// Throws NotFoundError for an unknown config.
  std::string create_session(const std::string& config_ref = "default");
  /// Runs one pipeline turn. Throws NotFoundError, BusyError (a turn is already
  /// in flight), PreconditionError or StageError; the session is unchanged on error.
  Json post_message(const std::string& session_id, const std::string& text);
  void annotate_turn(const std::string& session_id, std::size_t turn_index, const TurnAnnotation& annotation);
  std::optional<TurnAnnotation> annotation(const std::string& session_id, std::size_t turn_index) const;
  void set_rating(const std::string& session_id, int value);

  std::vector<TurnRecord> records(const std::string& session_id) const;
  std::string export_log(const std::string& session_id) const;
  std::string config_of(const std::string& session_id) const;
  ConversationState state(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;

  /// Aggregates stored annotations per config tag.
  std::vector<TurnSummary> annotation_summary() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& session_id) const;
  void append_event(Session& s, const Json& event);
  void replay(const std::filesystem::path& file);
  std::string new_session_id();

  std::filesystem::path data_dir_;
  std::map<std::string, PipelineProfile> profiles_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex id_mutex_;
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path ui_dir;  // served at "/" when it exists
};

class Service {
 public:
  Service(SessionStore& store, ServiceOptions options);
  ~Service();

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  void install_routes();

  SessionStore& store_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace seeker
