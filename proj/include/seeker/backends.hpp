#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "seeker/modelio.hpp"

namespace seeker {

struct ScriptEntry {
  std::string pattern;               // ECMAScript regex, searched in PackedInput::render()
  std::vector<std::string> outputs;  // ranked hypotheses
};

/// Deterministic lookup backend: the first entry whose pattern matches the
/// rendered input answers. Unmatched input raises BackendError.
class ScriptedBackend final : public GenerationBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> script, PackingStyle packing = PackingStyle::FusionSlots);

  /// JSONL lines of {"pattern": "...", "output": "..."} or {"pattern": "...", "outputs": [...]}.
  static std::unique_ptr<ScriptedBackend> from_jsonl(const std::filesystem::path& path);

  std::string name() const override { return "scripted"; }
  PackingStyle preferred_packing() const override { return packing_; }

 protected:
  std::vector<std::string> do_generate(const PackedInput& input, const DecodingSpec& spec,
                                       const NGramSet& banned) override;

 private:
  std::vector<ScriptEntry> script_;
  std::vector<std::regex> compiled_;
  PackingStyle packing_;
};

using ScriptedEntries = std::vector<ScriptEntry>;
std::unique_ptr<GenerationBackend> scripted_backend(ScriptedEntries script);

/// Backend built from callables; handy for tests and in-process adapters.
class FunctionBackend final : public GenerationBackend {
 public:
  using GenerateFn = std::function<std::vector<std::string>(const PackedInput&, const DecodingSpec&, const NGramSet&)>;
  using ScoreFn = std::function<std::optional<ScoreResult>(const PackedInput&, std::string_view)>;

  explicit FunctionBackend(GenerateFn generate, ScoreFn score = {}, std::string name = "function",
                           PackingStyle packing = PackingStyle::FusionSlots, bool concurrent = true);

  std::string name() const override { return name_; }
  bool concurrent() const override { return concurrent_; }
  bool supports_scoring() const override { return static_cast<bool>(score_); }
  PackingStyle preferred_packing() const override { return packing_; }

 protected:
  std::vector<std::string> do_generate(const PackedInput& input, const DecodingSpec& spec,
                                       const NGramSet& banned) override {
    return generate_(input, spec, banned);
  }
  std::optional<ScoreResult> do_score(const PackedInput& input, std::string_view continuation) override {
    return score_(input, continuation);
  }

 private:
  GenerateFn generate_;
  ScoreFn score_;
  std::string name_;
  PackingStyle packing_;
  bool concurrent_;
};

struct HttpBackendOptions {
  std::string endpoint;  // http://host:port/path
  std::string auth_token;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{100};
  std::chrono::milliseconds backoff_cap{2000};
  PackingStyle packing = PackingStyle::FusionSlots;
  std::size_t context_limit = 1024;
  bool scoring = false;
};

/// JSON-over-HTTP backend.
///
/// Generation request:
///   {style, slots | flat_text, context, spec: {strategy, beam_size, min_length, block_n},
///    banned_ngrams: [[t, t, t], ...]}
/// response {text} or {candidates: [...]} or {error}. A scoring request adds
/// "continuation" and expects {nll, token_count}. Network errors and 5xx replies
/// are retried with capped exponential backoff; every attempt carries the same
/// X-Request-Id header.
class HttpBackend final : public GenerationBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  std::string name() const override { return "http(" + options_.endpoint + ")"; }
  bool supports_scoring() const override { return options_.scoring; }
  PackingStyle preferred_packing() const override { return options_.packing; }
  std::size_t context_token_limit() const override { return options_.context_limit; }

  static nlohmann::json encode_request(const PackedInput& input, const DecodingSpec& spec, const NGramSet& banned);

 protected:
  std::vector<std::string> do_generate(const PackedInput& input, const DecodingSpec& spec,
                                       const NGramSet& banned) override;
  std::optional<ScoreResult> do_score(const PackedInput& input, std::string_view continuation) override;

 private:
  nlohmann::json post(const nlohmann::json& body);

  HttpBackendOptions options_;
  std::string base_;  // scheme://host:port
  std::string path_;
};

std::unique_ptr<GenerationBackend> http_backend(const std::string& endpoint, const std::string& auth_token);

/// Splits "http://host:port/path" into ("http://host:port", "/path"). Throws on other schemes.
std::pair<std::string, std::string> split_http_url(const std::string& url);

}  // namespace seeker
