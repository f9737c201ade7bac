#include "seeker/backends.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "seeker/errors.hpp"

namespace seeker {

using nlohmann::json;

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> script, PackingStyle packing)
    : script_(std::move(script)), packing_(packing) {
  compiled_.reserve(script_.size());
  for (const auto& e : script_) {
    try {
      compiled_.emplace_back(e.pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& err) {
      throw PreconditionError("scripted backend: bad pattern '" + e.pattern + "': " + err.what());
    }
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script " + path.string());
  std::vector<ScriptEntry> script;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto j = json::parse(line);
    ScriptEntry e;
    e.pattern = j.at("pattern").get<std::string>();
    if (j.contains("outputs")) e.outputs = j.at("outputs").get<std::vector<std::string>>();
    else e.outputs.push_back(j.at("output").get<std::string>());
    script.push_back(std::move(e));
  }
  return std::make_unique<ScriptedBackend>(std::move(script));
}

std::vector<std::string> ScriptedBackend::do_generate(const PackedInput& input, const DecodingSpec&,
                                                      const NGramSet&) {
  const std::string text = input.render();
  for (std::size_t i = 0; i < script_.size(); ++i) {
    if (std::regex_search(text, compiled_[i])) return script_[i].outputs;
  }
  throw BackendError("scripted backend: no pattern matches input");
}

std::unique_ptr<GenerationBackend> scripted_backend(ScriptedEntries script) {
  return std::make_unique<ScriptedBackend>(std::move(script));
}

FunctionBackend::FunctionBackend(GenerateFn generate, ScoreFn score, std::string name, PackingStyle packing,
                                 bool concurrent)
    : generate_(std::move(generate)),
      score_(std::move(score)),
      name_(std::move(name)),
      packing_(packing),
      concurrent_(concurrent) {}

// ---------------------------------------------------------------------------

std::pair<std::string, std::string> split_http_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw PreconditionError("only http:// endpoints are supported: " + url);
  const auto slash = url.find('/', scheme.size());
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

namespace {

std::string new_request_id() {
  static std::atomic<std::uint64_t> counter{0};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream os;
  os << std::hex << rng() << '-' << counter.fetch_add(1);
  return os.str();
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  std::tie(base_, path_) = split_http_url(options_.endpoint);
}

json HttpBackend::encode_request(const PackedInput& input, const DecodingSpec& spec, const NGramSet& banned) {
  json req;
  req["style"] = std::string(to_string(input.style));
  if (input.style == PackingStyle::FusionSlots) {
    json slots = json::array();
    for (const auto& s : input.slots) slots.push_back({{"header", s.header}, {"body", s.body}, {"context", s.context}});
    req["slots"] = std::move(slots);
  } else {
    req["flat_text"] = input.flat_text;
  }
  req["context"] = input.context;
  req["spec"] = {{"strategy", std::string(to_string(spec.strategy))},
                 {"beam_size", spec.beam_size},
                 {"min_length", spec.min_length},
                 {"block_n", spec.block_n}};
  json grams = json::array();
  for (const auto& g : banned.grams) grams.push_back(g);
  req["banned_ngrams"] = std::move(grams);
  return req;
}

json HttpBackend::post(const json& body) {
  const std::string request_id = new_request_id();
  const std::string payload = body.dump();
  httplib::Headers headers = {{"X-Request-Id", request_id}};
  if (!options_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + options_.auth_token);

  std::string last_error;
  auto backoff = options_.backoff_base;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, options_.backoff_cap);
    }
    httplib::Client client(base_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError(name() + ": HTTP " + std::to_string(res->status) + " (request " + request_id + ")",
                         request_id);
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw ProtocolError(name() + ": malformed response (request " + request_id + "): " + e.what(), request_id);
    }
    if (!reply.is_object()) throw ProtocolError(name() + ": response is not an object", request_id);
    if (reply.contains("error")) {
      throw BackendError(name() + ": " + reply["error"].dump() + " (request " + request_id + ")", request_id);
    }
    return reply;
  }
  throw BackendError(name() + ": giving up after " + std::to_string(options_.max_retries + 1) +
                         " attempts: " + last_error + " (request " + request_id + ")",
                     request_id);
}

std::vector<std::string> HttpBackend::do_generate(const PackedInput& input, const DecodingSpec& spec,
                                                  const NGramSet& banned) {
  const json reply = post(encode_request(input, spec, banned));
  try {
    if (reply.contains("candidates")) return reply.at("candidates").get<std::vector<std::string>>();
    if (reply.contains("text")) return {reply.at("text").get<std::string>()};
  } catch (const json::exception& e) {
    throw ProtocolError(name() + ": bad field type: " + e.what());
  }
  throw ProtocolError(name() + ": response has neither text nor candidates");
}

std::optional<ScoreResult> HttpBackend::do_score(const PackedInput& input, std::string_view continuation) {
  json req = encode_request(input, DecodingSpec{}, NGramSet{});
  req["continuation"] = std::string(continuation);
  const json reply = post(req);
  try {
    return ScoreResult{reply.at("nll").get<double>(), reply.at("token_count").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw ProtocolError(name() + ": bad score response: " + e.what());
  }
}

std::unique_ptr<GenerationBackend> http_backend(const std::string& endpoint, const std::string& auth_token) {
  HttpBackendOptions opts;
  opts.endpoint = endpoint;
  opts.auth_token = auth_token;
  return std::make_unique<HttpBackend>(std::move(opts));
}

}  // namespace seeker
