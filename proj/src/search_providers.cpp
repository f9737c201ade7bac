#include <httplib.h>

#include "seeker/backends.hpp"
#include "seeker/errors.hpp"
#include "seeker/pipeline.hpp"

namespace seeker {

std::vector<Document> LocalIndexProvider::search(const std::string& query, std::size_t depth) {
  if (!index_) throw RetrievalError(name(), "no index loaded");
  std::vector<Document> out;
  for (const auto& hit : lexical_search(*index_, query, std::max<std::size_t>(depth, 1))) {
    out.push_back(*index_->find(hit.doc_id));
  }
  return out;
}

HttpSearchProvider::HttpSearchProvider(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {
  std::tie(base_, path_) = split_http_url(endpoint_);
}

std::vector<Document> HttpSearchProvider::search(const std::string& query, std::size_t depth) {
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const Json body{{"q", query}, {"count", depth}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw RetrievalError(name(), "transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) throw RetrievalError(name(), "HTTP " + std::to_string(res->status));
  std::vector<Document> out;
  try {
    const auto reply = Json::parse(res->body);
    std::size_t i = 0;
    for (const auto& r : reply.at("results")) {
      const std::string url = r.value("url", std::string{});
      std::string id = r.value("id", url.empty() ? "result-" + std::to_string(i) : url);
      std::string content = r.contains("content") ? r.at("content").get<std::string>()
                                                  : r.value("snippet", std::string{});
      out.push_back(Document::make(std::move(id), url, r.value("title", std::string{}), std::move(content)));
      ++i;
      if (out.size() == depth) break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw RetrievalError(name(), std::string("malformed response: ") + e.what());
  }
  return out;
}

}  // namespace seeker
