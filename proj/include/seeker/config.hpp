#pragma once

// Runtime configuration file: `key = value` lines, `#` comments, optional
// double quotes around values. Keys before the first `[name]` header belong to
// the "default" profile and to the service; each `[name]` section starts a new
// profile that inherits every default key and overrides the ones it sets.
//
//   backend_endpoint = http://127.0.0.1:9000/generate
//   backend_auth_env = SEEKER_BACKEND_TOKEN     # variable holding the bearer token
//   backend_timeout_ms = 30000
//   backend_max_retries = 3
//   packing = fid | prepend                     # optional override
//   search_provider = local-index | remote
//   index_path = index.bin                      # local-index
//   search_endpoint = http://.../search         # remote
//   search_key_env = SEEKER_SEARCH_KEY
//   allowlist_path = allow.txt
//   k_docs = 5
//   date_suffix = (July 2022)
//   allow_empty_retrieval = false
//   listen = 127.0.0.1:8080                     # service only
//   data_dir = seeker-data
//   ui_dir = ui/dist

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "seeker/pipeline.hpp"

namespace seeker {

struct ProfileSettings {
  std::string backend_endpoint;
  std::string backend_auth_env = "SEEKER_BACKEND_TOKEN";
  long backend_timeout_ms = 30000;
  int backend_max_retries = 3;
  std::string packing;
  std::string search_provider = "local-index";
  std::string index_path;
  std::string search_endpoint;
  std::string search_key_env = "SEEKER_SEARCH_KEY";
  std::string allowlist_path;
  std::size_t k_docs = 5;
  std::string date_suffix;
  bool allow_empty_retrieval = false;
};

struct SeekerConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::filesystem::path data_dir = "seeker-data";
  std::filesystem::path ui_dir;
  std::map<std::string, ProfileSettings> profiles;  // always holds "default"
};

/// Throws PreconditionError naming the line on unknown keys or malformed values.
SeekerConfig parse_config(std::string_view text);
SeekerConfig load_config(const std::filesystem::path& path);

/// Relative paths inside a config file resolve against this directory.
struct ConfigContext {
  std::filesystem::path base_dir;
};

/// Builds the search provider, allowlist and decoding settings of a profile.
PipelineConfig build_pipeline_config(const ProfileSettings& p, const ConfigContext& ctx = {});

/// HTTP backend for the profile, reading the bearer token from its environment variable.
std::shared_ptr<GenerationBackend> build_backend(const ProfileSettings& p);

std::optional<PackingStyle> parse_packing(std::string_view s);

}  // namespace seeker
