#pragma once

// JSON helpers shared by the JSONL readers/writers. Output objects keep
// insertion order so serialized files have a stable field order.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seeker/corpus.hpp"

namespace seeker {

using Json = nlohmann::ordered_json;

/// {id, url, title, content}; domain and sentences are derived on read.
Json document_to_json(const Document& doc);
Document document_from_json(const Json& j);

/// Calls `fn` for every non-blank line parsed as JSON. Parse errors carry path:line.
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& fn);

/// Writes one compact JSON value per line; returns the number of lines.
std::size_t write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

}  // namespace seeker
