#include "seeker/service.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "seeker/errors.hpp"

namespace seeker {

namespace fs = std::filesystem;

Json turn_record_to_json(const TurnRecord& r) {
  Json j;
  j["turn_index"] = r.turn_index;
  j["user_message"] = r.user_message;
  j["trace"] = r.trace;
  j["annotation"] = r.annotation ? turn_annotation_to_json(*r.annotation) : Json(nullptr);
  j["final_rating"] = r.final_rating ? Json(*r.final_rating) : Json(nullptr);
  return j;
}

TurnRecord turn_record_from_json(const Json& j) {
  TurnRecord r;
  r.turn_index = j.at("turn_index").get<std::size_t>();
  r.user_message = j.at("user_message").get<std::string>();
  r.trace = j.at("trace");
  if (j.contains("annotation") && !j.at("annotation").is_null())
    r.annotation = turn_annotation_from_json(j.at("annotation"));
  if (j.contains("final_rating") && !j.at("final_rating").is_null()) r.final_rating = j.at("final_rating").get<int>();
  return r;
}

std::vector<TurnRecord> parse_exported_log(std::string_view ndjson) {
  std::vector<TurnRecord> out;
  std::istringstream in{std::string(ndjson)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(turn_record_from_json(Json::parse(line)));
  }
  return out;
}

std::vector<std::pair<std::string, TurnAnnotation>> annotations_of(const std::string& model,
                                                                    const std::vector<TurnRecord>& records) {
  std::vector<std::pair<std::string, TurnAnnotation>> out;
  for (const auto& r : records) {
    if (r.annotation) out.emplace_back(model, *r.annotation);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SessionStore::Session {
  std::string id;
  std::string config_ref;
  std::string created_at;
  std::mutex turn_mutex;  // held for the duration of a turn
  mutable std::mutex data_mutex;
  ConversationState state;
  std::vector<TurnRecord> records;
  std::optional<int> rating;
  std::FILE* file = nullptr;

  ~Session() {
    if (file) std::fclose(file);
  }
};

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Rebuilds the conversation state a completed turn left behind.
void apply_turn(ConversationState& state, const TurnRecord& r, const ControlTokens& tokens) {
  state.turns.push_back(Turn{"user", escape_control_tokens(trim(r.user_message), tokens)});
  state.accumulated_knowledge.push_back(r.trace.at("knowledge").get<std::string>());
  state.turns.push_back(Turn{"model", r.trace.at("response").get<std::string>()});
}

}  // namespace

SessionStore::SessionStore(fs::path data_dir, std::map<std::string, PipelineProfile> profiles)
    : data_dir_(std::move(data_dir)), profiles_(std::move(profiles)) {
  fs::create_directories(data_dir_ / "sessions");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(data_dir_ / "sessions")) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) replay(f);
}

SessionStore::~SessionStore() = default;

void SessionStore::replay(const fs::path& file) {
  auto s = std::make_shared<Session>();
  s->id = file.stem().string();
  s->state.session_id = s->id;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    Json ev;
    try {
      ev = Json::parse(line);
    } catch (const nlohmann::json::exception&) {
      break;  // torn final write: everything before it was acknowledged
    }
    const std::string kind = ev.value("event", std::string{});
    if (kind == "created") {
      s->config_ref = ev.value("config", std::string{"default"});
      s->created_at = ev.value("created_at", std::string{});
    } else if (kind == "turn") {
      TurnRecord r = turn_record_from_json(ev.at("record"));
      auto p = profiles_.find(s->config_ref);
      apply_turn(s->state, r, p == profiles_.end() ? ControlTokens{} : p->second.config.tokens);
      s->records.push_back(std::move(r));
    } else if (kind == "annotation") {
      const auto idx = ev.at("turn_index").get<std::size_t>();
      if (idx < s->records.size()) s->records[idx].annotation = turn_annotation_from_json(ev.at("annotation"));
    } else if (kind == "rating") {
      s->rating = ev.at("value").get<int>();
    }
  }
  s->file = std::fopen(file.c_str(), "a");
  if (!s->file) throw IoError("cannot reopen session log " + file.string());
  std::unique_lock lock(mutex_);
  sessions_.emplace(s->id, std::move(s));
}

void SessionStore::append_event(Session& s, const Json& event) {
  const std::string line = event.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), s.file) != line.size() || std::fflush(s.file) != 0 ||
      ::fsync(fileno(s.file)) != 0)
    throw IoError("failed to persist event for session " + s.id);
}

std::string SessionStore::new_session_id() {
  std::lock_guard lock(id_mutex_);
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + session_id);
  return it->second;
}

std::string SessionStore::create_session(const std::string& config_ref) {
  if (!profiles_.count(config_ref)) throw NotFoundError("unknown config " + config_ref);
  auto s = std::make_shared<Session>();
  {
    std::shared_lock lock(mutex_);
    do {
      s->id = new_session_id();
    } while (sessions_.count(s->id));
  }
  s->config_ref = config_ref;
  s->created_at = utc_now();
  s->state.session_id = s->id;
  const fs::path file = data_dir_ / "sessions" / (s->id + ".jsonl");
  s->file = std::fopen(file.c_str(), "a");
  if (!s->file) throw IoError("cannot create session log " + file.string());
  append_event(*s, Json{{"event", "created"}, {"session_id", s->id}, {"config", config_ref},
                        {"created_at", s->created_at}});
  const std::string id = s->id;
  std::unique_lock lock(mutex_);
  sessions_.emplace(id, std::move(s));
  return id;
}

Json SessionStore::post_message(const std::string& session_id, const std::string& text) {
  auto s = find(session_id);
  std::unique_lock turn(s->turn_mutex, std::try_to_lock);
  if (!turn.owns_lock()) throw BusyError("session " + session_id + " is processing another turn");
  if (trim(text).empty()) throw PreconditionError("message text must be non-empty");
  auto profile = profiles_.find(s->config_ref);
  if (profile == profiles_.end()) throw NotFoundError("unknown config " + s->config_ref);

  ConversationState work;
  {
    std::lock_guard lock(s->data_mutex);
    work = s->state;
  }
  const TurnTrace trace = run_turn(work, text, *profile->second.backend, profile->second.config);

  std::lock_guard lock(s->data_mutex);
  TurnRecord record;
  record.turn_index = s->records.size();
  record.user_message = text;
  record.trace = Json{{"turn_index", record.turn_index}};
  const Json body = trace_to_json(trace);
  for (const auto& [k, v] : body.items()) record.trace[k] = v;
  append_event(*s, Json{{"event", "turn"}, {"record", turn_record_to_json(record)}});
  s->state = std::move(work);
  s->records.push_back(record);
  return record.trace;
}

void SessionStore::annotate_turn(const std::string& session_id, std::size_t turn_index,
                                 const TurnAnnotation& annotation) {
  auto s = find(session_id);
  std::lock_guard lock(s->data_mutex);
  if (turn_index >= s->records.size())
    throw NotFoundError("session " + session_id + " has no completed turn " + std::to_string(turn_index));
  append_event(*s, Json{{"event", "annotation"},
                        {"turn_index", turn_index},
                        {"annotation", turn_annotation_to_json(annotation)}});
  s->records[turn_index].annotation = annotation;
}

std::optional<TurnAnnotation> SessionStore::annotation(const std::string& session_id, std::size_t turn_index) const {
  auto s = find(session_id);
  std::lock_guard lock(s->data_mutex);
  if (turn_index >= s->records.size())
    throw NotFoundError("session " + session_id + " has no completed turn " + std::to_string(turn_index));
  return s->records[turn_index].annotation;
}

void SessionStore::set_rating(const std::string& session_id, int value) {
  if (value < 1 || value > 5) throw PreconditionError("rating must be between 1 and 5");
  auto s = find(session_id);
  std::lock_guard lock(s->data_mutex);
  append_event(*s, Json{{"event", "rating"}, {"value", value}});
  s->rating = value;
}

std::vector<TurnRecord> SessionStore::records(const std::string& session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->data_mutex);
  auto out = s->records;
  if (!out.empty()) out.back().final_rating = s->rating;
  return out;
}

std::string SessionStore::export_log(const std::string& session_id) const {
  std::string out;
  for (const auto& r : records(session_id)) out += turn_record_to_json(r).dump() + "\n";
  return out;
}

std::string SessionStore::config_of(const std::string& session_id) const { return find(session_id)->config_ref; }

ConversationState SessionStore::state(const std::string& session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->data_mutex);
  return s->state;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::vector<TurnSummary> SessionStore::annotation_summary() const {
  std::vector<std::pair<std::string, TurnAnnotation>> all;
  std::map<std::string, std::pair<double, std::size_t>> ratings;
  for (const auto& id : session_ids()) {
    auto s = find(id);
    std::lock_guard lock(s->data_mutex);
    auto part = annotations_of(s->config_ref, s->records);
    all.insert(all.end(), part.begin(), part.end());
    if (s->rating) {
      auto& r = ratings[s->config_ref];
      r.first += *s->rating;
      ++r.second;
    }
  }
  auto summary = aggregate_turn_annotations(all);
  for (auto& row : summary) {
    auto it = ratings.find(row.model);
    if (it != ratings.end()) row.mean_rating = it->second.first / static_cast<double>(it->second.second);
  }
  return summary;
}

// ---------------------------------------------------------------------------
// HTTP

Service::Service(SessionStore& store, ServiceOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Service::~Service() { stop(); }

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFoundError& e) {
    send_json(res, 404, {{"error", e.what()}});
  } catch (const BusyError& e) {
    send_json(res, 409, {{"error", e.what()}});
  } catch (const PreconditionError& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const StageError& e) {
    send_json(res, 502, {{"error", e.what()}, {"stage", e.stage()}});
  } catch (const nlohmann::json::exception& e) {
    send_json(res, 400, {{"error", std::string("bad request body: ") + e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

Json body_of(const httplib::Request& req) {
  if (trim(req.body).empty()) return Json::object();
  return Json::parse(req.body);
}

}  // namespace

void Service::install_routes() {
  auto& srv = *server_;
  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = body_of(req);
      const std::string id = store_.create_session(body.value("config", std::string{"default"}));
      send_json(res, 201, {{"session_id", id}});
    });
  });
  srv.Get(R"(/sessions/([0-9A-Za-z_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      Json turns = Json::array();
      for (const auto& r : store_.records(id)) turns.push_back(turn_record_to_json(r));
      send_json(res, 200, {{"session_id", id}, {"config", store_.config_of(id)}, {"turns", turns}});
    });
  });
  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = body_of(req);
      send_json(res, 200, store_.post_message(req.matches[1], body.at("text").get<std::string>()));
    });
  });
  srv.Put(R"(/sessions/([0-9A-Za-z_-]+)/turns/(\d+)/annotation)",
          [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const auto a = turn_annotation_from_json(body_of(req));
              const std::size_t n = std::stoul(req.matches[2]);
              store_.annotate_turn(req.matches[1], n, a);
              send_json(res, 200, {{"turn_index", n}, {"annotation", turn_annotation_to_json(a)}});
            });
          });
  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/turns/(\d+)/annotation)",
          [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const std::size_t n = std::stoul(req.matches[2]);
              const auto a = store_.annotation(req.matches[1], n);
              send_json(res, 200, {{"turn_index", n}, {"annotation", a ? turn_annotation_to_json(*a) : Json(nullptr)}});
            });
          });
  srv.Put(R"(/sessions/([0-9A-Za-z_-]+)/rating)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const int value = body_of(req).at("value").get<int>();
      store_.set_rating(req.matches[1], value);
      send_json(res, 200, {{"value", value}});
    });
  });
  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(store_.export_log(req.matches[1]), "application/x-ndjson");
    });
  });
  srv.Get("/annotations/summary", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      Json rows = Json::array();
      for (const auto& s : store_.annotation_summary()) rows.push_back(turn_summary_to_json(s));
      send_json(res, 200, {{"models", rows}});
    });
  });
  if (!options_.ui_dir.empty() && fs::is_directory(options_.ui_dir)) {
    srv.set_mount_point("/", options_.ui_dir.string());
  }
}

int Service::start() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.host);
  } else if (!server_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) throw IoError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::run() {
  if (!server_->listen(options_.host, options_.port))
    throw IoError("cannot listen on " + options_.host + ":" + std::to_string(options_.port));
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace seeker
