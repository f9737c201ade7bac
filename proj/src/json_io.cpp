#include "seeker/json_io.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>

#include "seeker/errors.hpp"

namespace seeker {

Json document_to_json(const Document& doc) {
  Json j;
  j["id"] = doc.id;
  j["url"] = doc.url;
  j["title"] = doc.title;
  j["content"] = doc.content;
  return j;
}

Document document_from_json(const Json& j) {
  return Document::make(j.at("id").get<std::string>(), j.value("url", std::string{}), j.value("title", std::string{}),
                        j.at("content").get<std::string>());
}

void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      fn(j);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::size_t write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string() + ": " + std::strerror(errno));
  for (const auto& r : rows) out << r.dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path.string() + ": " + std::strerror(errno));
  return rows.size();
}

}  // namespace seeker
