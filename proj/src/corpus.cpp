#include "seeker/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "seeker/errors.hpp"

namespace seeker {

namespace {

constexpr std::string_view kTwoLevelSuffixes[] = {
    "co.uk", "ac.uk", "gov.uk", "org.uk", "me.uk", "ltd.uk", "plc.uk", "com.au", "net.au", "org.au",
    "edu.au", "gov.au", "co.nz", "org.nz", "co.jp", "ne.jp", "or.jp", "co.in", "co.za", "com.br",
    "com.cn", "com.mx", "com.ar", "com.tr", "co.kr", "com.sg", "com.hk"};

}  // namespace

std::string registrable_domain(std::string_view url) {
  std::string_view rest = url;
  if (auto scheme = rest.find("://"); scheme != std::string_view::npos) rest.remove_prefix(scheme + 3);
  else if (rest.starts_with("//")) rest.remove_prefix(2);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (auto at = rest.rfind('@'); at != std::string_view::npos) rest.remove_prefix(at + 1);
  if (!rest.empty() && rest.front() == '[') return to_lower_ascii(rest);  // IPv6 literal
  rest = rest.substr(0, rest.find(':'));
  std::string host = to_lower_ascii(rest);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) return {};
  if (std::all_of(host.begin(), host.end(), [](char c) { return (c >= '0' && c <= '9') || c == '.'; }))
    return host;

  std::vector<std::string_view> labels;
  std::string_view h = host;
  while (true) {
    auto dot = h.find('.');
    labels.push_back(h.substr(0, dot));
    if (dot == std::string_view::npos) break;
    h.remove_prefix(dot + 1);
  }
  std::size_t keep = 2;
  if (labels.size() >= 2) {
    std::string last_two = std::string(labels[labels.size() - 2]) + "." + std::string(labels.back());
    for (auto s : kTwoLevelSuffixes) {
      if (last_two == s) keep = 3;
    }
  }
  if (labels.size() <= keep) return host;
  std::vector<std::string> tail;
  for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) tail.emplace_back(labels[i]);
  return join(tail, ".");
}

Document Document::make(std::string id, std::string url, std::string title, std::string content) {
  Document d;
  d.domain = registrable_domain(url);
  d.sentences = split_sentences(content, id);
  d.id = std::move(id);
  d.url = std::move(url);
  d.title = std::move(title);
  d.content = std::move(content);
  return d;
}

// ---------------------------------------------------------------------------

DomainAllowlist::DomainAllowlist(const std::vector<std::string>& domains) {
  for (const auto& raw : domains) {
    std::string d = to_lower_ascii(trim(raw));
    if (d.empty()) continue;
    if (d.find("://") != std::string::npos || d.find_first_of("/:?# \t") != std::string::npos)
      throw PreconditionError("allowlist entry is not a bare domain: " + raw);
    domains_.insert(std::move(d));
  }
}

DomainAllowlist DomainAllowlist::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open allowlist " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    entries.push_back(t);
  }
  return DomainAllowlist(entries);
}

// ---------------------------------------------------------------------------

CorpusIndex CorpusIndex::build(std::vector<Document> docs, Bm25Params params) {
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].id == docs[i - 1].id) throw PreconditionError("duplicate document id: " + docs[i].id);
  }
  CorpusIndex index;
  index.params_ = params;
  index.docs_ = std::move(docs);
  for (std::size_t d = 0; d < index.docs_.size(); ++d) {
    const Document& doc = index.docs_[d];
    for (const auto& s : doc.sentences) {
      const auto gid = static_cast<std::uint32_t>(index.sentence_doc_.size());
      index.sentence_doc_.push_back(static_cast<std::uint32_t>(d));
      index.sentence_pos_.push_back(static_cast<std::uint32_t>(s.index));
      const auto toks = normalize(s.text);
      index.sentence_len_.push_back(static_cast<std::uint32_t>(toks.size()));
      std::unordered_map<std::string, std::uint32_t> tf;
      for (const auto& t : toks.tokens) ++tf[t];
      for (auto& [term, count] : tf) index.postings_[term].push_back(Posting{gid, count});
    }
  }
  // Postings were appended in gid order already; keep it explicit.
  for (auto& [term, list] : index.postings_) {
    std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.sentence < b.sentence; });
  }
  index.finalize();
  return index;
}

void CorpusIndex::finalize() {
  by_id_.clear();
  for (std::size_t d = 0; d < docs_.size(); ++d) by_id_.emplace(docs_[d].id, d);
  double total = 0.0;
  for (auto len : sentence_len_) total += len;
  avg_len_ = sentence_len_.empty() ? 0.0 : total / static_cast<double>(sentence_len_.size());
}

const Document* CorpusIndex::find(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const SentenceSpan& CorpusIndex::sentence(std::uint32_t gid) const {
  return docs_[sentence_doc_[gid]].sentences[sentence_pos_[gid]];
}

std::span<const CorpusIndex::Posting> CorpusIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  if (it == postings_.end()) return {};
  return it->second;
}

double CorpusIndex::idf(std::string_view term) const {
  const double n = static_cast<double>(sentence_count());
  const double df = static_cast<double>(document_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<std::pair<std::string, std::vector<CorpusIndex::Posting>>> CorpusIndex::sorted_postings() const {
  std::vector<std::pair<std::string, std::vector<Posting>>> out(postings_.begin(), postings_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

bool CorpusIndex::operator==(const CorpusIndex& other) const {
  return params_.k1 == other.params_.k1 && params_.b == other.params_.b && docs_ == other.docs_ &&
         sentence_doc_ == other.sentence_doc_ && sentence_pos_ == other.sentence_pos_ &&
         sentence_len_ == other.sentence_len_ && postings_ == other.postings_;
}

// ---------------------------------------------------------------------------

std::vector<SentenceHit> search_sentences(const CorpusIndex& index, std::string_view query, std::size_t k,
                                          const std::function<bool(std::uint32_t)>& keep) {
  if (k == 0) throw PreconditionError("search: k must be >= 1");
  auto terms = normalize(query).tokens;
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  const auto& p = index.params();
  const double avg = index.average_sentence_length() > 0 ? index.average_sentence_length() : 1.0;
  std::unordered_map<std::uint32_t, double> scores;
  for (const auto& term : terms) {
    const auto list = index.postings(term);
    if (list.empty()) continue;
    const double idf = index.idf(term);
    for (const auto& post : list) {
      const double tf = post.tf;
      const double len = static_cast<double>(index.sentence_length(post.sentence));
      const double norm = p.k1 * (1.0 - p.b + p.b * len / avg);
      scores[post.sentence] += idf * tf * (p.k1 + 1.0) / (tf + norm);
    }
  }

  std::vector<SentenceHit> hits;
  hits.reserve(scores.size());
  for (const auto& [gid, score] : scores) {
    if (score > 0.0 && (!keep || keep(gid))) hits.push_back(SentenceHit{gid, score});
  }
  auto better = [](const SentenceHit& a, const SentenceHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.sentence < b.sentence;
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), better);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
  return hits;
}

std::vector<SearchHit> lexical_search(const CorpusIndex& index, std::string_view query, std::size_t k) {
  if (k == 0) throw PreconditionError("lexical_search: k must be >= 1");
  const auto ranked = search_sentences(index, query, std::max<std::size_t>(index.sentence_count(), 1));
  std::vector<SearchHit> out;
  std::set<std::string_view> seen;
  for (const auto& h : ranked) {
    const Document& doc = index.sentence_document(h.sentence);
    if (!seen.insert(doc.id).second) continue;
    out.push_back(SearchHit{doc.id, h.score, index.sentence(h.sentence).index});
    if (out.size() == k) break;
  }
  return out;
}

std::optional<NearestSentence> nearest_sentence(const CorpusIndex& index, std::string_view target,
                                                std::string_view exclude_doc, std::size_t candidate_pool) {
  const std::string target_text = trim(target);
  const auto pool = search_sentences(index, target_text, std::max<std::size_t>(candidate_pool, 1),
                                     [&](std::uint32_t gid) {
                                       return index.sentence_document(gid).id != exclude_doc &&
                                              index.sentence(gid).text != target_text;
                                     });
  if (pool.empty()) return std::nullopt;
  const auto target_tokens = normalize(target_text);
  std::optional<std::uint32_t> best;
  double best_f1 = -1.0;
  for (const auto& h : pool) {
    const double f1 = f1_overlap(normalize(index.sentence(h.sentence).text), target_tokens);
    if (f1 > best_f1 || (f1 == best_f1 && h.sentence < *best)) {
      best = h.sentence;
      best_f1 = f1;
    }
  }
  return NearestSentence{index.sentence(*best), best_f1};
}

std::vector<Document> filter_allowlist(const std::vector<Document>& docs, const DomainAllowlist& allow,
                                       std::size_t k) {
  if (k == 0) throw PreconditionError("filter_allowlist: k must be >= 1");
  std::vector<Document> out;
  for (const auto& d : docs) {
    if (out.size() == k) break;
    if (allow.allows(d.domain)) out.push_back(d);
  }
  return out;
}

std::vector<Document> load_documents_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      docs.push_back(Document::make(j.at("id").get<std::string>(), j.value("url", std::string{}),
                                    j.value("title", std::string{}), j.at("content").get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace seeker
