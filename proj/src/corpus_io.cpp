// Binary index format (little-endian):
//
//   magic "SKRIDX01", f64 k1, f64 b,
//   u64 #docs, then per doc: str id, url, domain, title, content,
//     u64 #sentences, then per sentence: u64 begin, end, token_count
//   u64 #terms, then per term (sorted): str term, u64 #postings, (u32 sentence, u32 tf)*
//
// str = u64 byte length + bytes. Sentence text is recovered from content[begin, end).

#include <cstring>
#include <fstream>

#include "seeker/corpus.hpp"
#include "seeker/errors.hpp"

namespace seeker {

namespace {

constexpr char kMagic[8] = {'S', 'K', 'R', 'I', 'D', 'X', '0', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) fail("truncated file");
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1ull << 34)) fail("implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail("truncated file");
    return s;
  }
  [[noreturn]] void fail(const std::string& why) const { throw IoError(name_ + ": " + why); }

 private:
  std::istream& in_;
  std::string name_;
};

}  // namespace

void CorpusIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.pod(params_.k1);
  w.pod(params_.b);
  w.pod<std::uint64_t>(docs_.size());
  for (const auto& d : docs_) {
    w.str(d.id);
    w.str(d.url);
    w.str(d.domain);
    w.str(d.title);
    w.str(d.content);
    w.pod<std::uint64_t>(d.sentences.size());
    for (const auto& s : d.sentences) {
      w.pod<std::uint64_t>(s.begin);
      w.pod<std::uint64_t>(s.end);
      w.pod<std::uint64_t>(s.token_count);
    }
  }
  const auto terms = sorted_postings();
  w.pod<std::uint64_t>(terms.size());
  for (const auto& [term, list] : terms) {
    w.str(term);
    w.pod<std::uint64_t>(list.size());
    for (const auto& p : list) {
      w.pod(p.sentence);
      w.pod(p.tf);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

CorpusIndex CorpusIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index " + path.string());
  Reader r(in, path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) r.fail("not a corpus index");

  CorpusIndex index;
  index.params_.k1 = r.pod<double>();
  index.params_.b = r.pod<double>();
  const auto ndocs = r.pod<std::uint64_t>();
  index.docs_.reserve(ndocs);
  for (std::uint64_t di = 0; di < ndocs; ++di) {
    Document d;
    d.id = r.str();
    d.url = r.str();
    d.domain = r.str();
    d.title = r.str();
    d.content = r.str();
    const auto ns = r.pod<std::uint64_t>();
    for (std::uint64_t si = 0; si < ns; ++si) {
      SentenceSpan s;
      s.doc_id = d.id;
      s.index = si;
      s.begin = r.pod<std::uint64_t>();
      s.end = r.pod<std::uint64_t>();
      s.token_count = r.pod<std::uint64_t>();
      if (s.begin > s.end || s.end > d.content.size()) r.fail("sentence span out of range");
      s.text = d.content.substr(s.begin, s.end - s.begin);
      index.sentence_doc_.push_back(static_cast<std::uint32_t>(di));
      index.sentence_pos_.push_back(static_cast<std::uint32_t>(si));
      index.sentence_len_.push_back(static_cast<std::uint32_t>(s.token_count));
      d.sentences.push_back(std::move(s));
    }
    if (!index.docs_.empty() && !(index.docs_.back().id < d.id)) r.fail("documents not sorted by id");
    index.docs_.push_back(std::move(d));
  }
  const auto nterms = r.pod<std::uint64_t>();
  for (std::uint64_t t = 0; t < nterms; ++t) {
    std::string term = r.str();
    const auto np = r.pod<std::uint64_t>();
    std::vector<Posting> list;
    list.reserve(np);
    for (std::uint64_t i = 0; i < np; ++i) {
      Posting p;
      p.sentence = r.pod<std::uint32_t>();
      p.tf = r.pod<std::uint32_t>();
      if (p.sentence >= index.sentence_doc_.size()) r.fail("posting refers to unknown sentence");
      list.push_back(p);
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  index.finalize();
  return index;
}

}  // namespace seeker
