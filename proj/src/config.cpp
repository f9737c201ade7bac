#include "seeker/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "seeker/backends.hpp"
#include "seeker/errors.hpp"

namespace seeker {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_line(std::size_t line_no, const std::string& msg) {
  throw PreconditionError("config line " + std::to_string(line_no) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& v, std::size_t line_no) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_line(line_no, "not a number: " + v);
  return out;
}

bool parse_bool(const std::string& v, std::size_t line_no) {
  const std::string l = to_lower_ascii(v);
  if (l == "true" || l == "yes" || l == "1") return true;
  if (l == "false" || l == "no" || l == "0") return false;
  bad_line(line_no, "not a boolean: " + v);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  // Trailing comments are only recognised outside quotes.
  if (auto hash = v.find(" #"); hash != std::string::npos) v = trim(v.substr(0, hash));
  return v;
}

void apply_profile_key(ProfileSettings& p, const std::string& key, const std::string& v, std::size_t line_no) {
  if (key == "backend_endpoint") p.backend_endpoint = v;
  else if (key == "backend_auth_env") p.backend_auth_env = v;
  else if (key == "backend_timeout_ms") p.backend_timeout_ms = parse_number<long>(v, line_no);
  else if (key == "backend_max_retries") p.backend_max_retries = parse_number<int>(v, line_no);
  else if (key == "packing") {
    if (!v.empty() && !parse_packing(v)) bad_line(line_no, "packing must be fid or prepend");
    p.packing = v;
  } else if (key == "search_provider") {
    if (v != "local-index" && v != "remote") bad_line(line_no, "search_provider must be local-index or remote");
    p.search_provider = v;
  } else if (key == "index_path") p.index_path = v;
  else if (key == "search_endpoint") p.search_endpoint = v;
  else if (key == "search_key_env") p.search_key_env = v;
  else if (key == "allowlist_path") p.allowlist_path = v;
  else if (key == "k_docs") p.k_docs = parse_number<std::size_t>(v, line_no);
  else if (key == "date_suffix") p.date_suffix = v;
  else if (key == "allow_empty_retrieval") p.allow_empty_retrieval = parse_bool(v, line_no);
  else bad_line(line_no, "unknown key '" + key + "'");
}

}  // namespace

std::optional<PackingStyle> parse_packing(std::string_view s) {
  const std::string l = to_lower_ascii(s);
  if (l == "fid" || l == "fusion" || l == "fusion_slots") return PackingStyle::FusionSlots;
  if (l == "prepend") return PackingStyle::Prepend;
  return std::nullopt;
}

SeekerConfig parse_config(std::string_view text) {
  SeekerConfig cfg;
  ProfileSettings defaults;
  // Section overrides are replayed over the final defaults so key order does not matter.
  std::vector<std::pair<std::string, std::vector<std::tuple<std::string, std::string, std::size_t>>>> sections;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad_line(line_no, "unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty() || name == "default") bad_line(line_no, "invalid profile name");
      for (const auto& s : sections)
        if (s.first == name) bad_line(line_no, "duplicate profile '" + name + "'");
      sections.push_back({name, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_line(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (!sections.empty()) {
      if (key == "listen" || key == "data_dir" || key == "ui_dir")
        bad_line(line_no, "'" + key + "' is only valid before the first profile section");
      sections.back().second.emplace_back(key, value, line_no);
      continue;
    }
    if (key == "listen") {
      const auto colon = value.rfind(':');
      if (colon == std::string::npos) bad_line(line_no, "listen must be host:port");
      cfg.listen_host = value.substr(0, colon);
      cfg.listen_port = parse_number<int>(value.substr(colon + 1), line_no);
      if (cfg.listen_port < 0 || cfg.listen_port > 65535) bad_line(line_no, "port out of range");
    } else if (key == "data_dir") {
      cfg.data_dir = value;
    } else if (key == "ui_dir") {
      cfg.ui_dir = value;
    } else {
      apply_profile_key(defaults, key, value, line_no);
    }
  }
  cfg.profiles["default"] = defaults;
  for (const auto& [name, entries] : sections) {
    ProfileSettings p = defaults;
    for (const auto& [k, v, n] : entries) apply_profile_key(p, k, v, n);
    cfg.profiles[name] = p;
  }
  return cfg;
}

SeekerConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  SeekerConfig cfg = parse_config(ss.str());
  const fs::path base = path.parent_path();
  auto resolve = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(cfg.data_dir);
  resolve(cfg.ui_dir);
  for (auto& [_, prof] : cfg.profiles) {
    for (std::string* s : {&prof.index_path, &prof.allowlist_path}) {
      fs::path p = *s;
      resolve(p);
      *s = p.string();
    }
  }
  return cfg;
}

PipelineConfig build_pipeline_config(const ProfileSettings& p, const ConfigContext& ctx) {
  auto resolve = [&](const std::string& s) {
    fs::path path = s;
    return (path.is_relative() && !ctx.base_dir.empty()) ? ctx.base_dir / path : path;
  };
  PipelineConfig cfg;
  cfg.k_docs = p.k_docs;
  cfg.allow_empty_retrieval = p.allow_empty_retrieval;
  if (!p.date_suffix.empty()) cfg.date_suffix = p.date_suffix;
  if (!p.packing.empty()) cfg.packing = parse_packing(p.packing);
  if (!p.allowlist_path.empty()) cfg.allowlist = DomainAllowlist::load(resolve(p.allowlist_path));
  if (p.search_provider == "remote") {
    if (p.search_endpoint.empty()) throw PreconditionError("remote search needs search_endpoint");
    const char* key = p.search_key_env.empty() ? nullptr : std::getenv(p.search_key_env.c_str());
    cfg.search = std::make_shared<HttpSearchProvider>(p.search_endpoint, key ? key : "");
  } else if (!p.index_path.empty()) {
    cfg.search = std::make_shared<LocalIndexProvider>(
        std::make_shared<const CorpusIndex>(CorpusIndex::load(resolve(p.index_path))));
  }
  cfg.validate();
  return cfg;
}

std::shared_ptr<GenerationBackend> build_backend(const ProfileSettings& p) {
  if (p.backend_endpoint.empty()) throw PreconditionError("backend_endpoint is not configured");
  HttpBackendOptions opt;
  opt.endpoint = p.backend_endpoint;
  if (const char* tok = p.backend_auth_env.empty() ? nullptr : std::getenv(p.backend_auth_env.c_str())) {
    opt.auth_token = tok;
  }
  opt.timeout = std::chrono::milliseconds{p.backend_timeout_ms};
  opt.max_retries = p.backend_max_retries;
  if (auto style = parse_packing(p.packing)) opt.packing = *style;
  return std::make_shared<HttpBackend>(opt);
}

}  // namespace seeker
