#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <set>
#include <unistd.h>

namespace fixtures {

namespace {
constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";
}  // namespace

std::string WordGen::word() {
  std::uniform_int_distribution<int> syl(2, 4), c(0, 13), v(0, 4);
  std::string w;
  for (int i = syl(rng_); i > 0; --i) {
    w += kConsonants[c(rng_)];
    w += kVowels[v(rng_)];
  }
  return w;
}

std::string WordGen::capitalized() {
  std::string w = word();
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::vector<std::string> WordGen::vocabulary(std::size_t n) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    auto w = word();
    if (seen.insert(w).second) out.push_back(w);
  }
  return out;
}

std::vector<seeker::Document> synthetic_corpus(std::uint64_t seed, const SyntheticCorpusOptions& opt) {
  WordGen gen(seed);
  const auto vocab = gen.vocabulary(opt.vocabulary);
  std::vector<std::string> entities;
  for (std::size_t i = 0; i < opt.entities; ++i) entities.push_back(gen.capitalized());
  auto& rng = gen.rng();
  std::uniform_int_distribution<std::size_t> n_sent(opt.min_sentences, opt.max_sentences);
  std::uniform_int_distribution<std::size_t> n_words(opt.min_words, opt.max_words);
  std::uniform_int_distribution<std::size_t> pick_word(0, vocab.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_entity(0, entities.size() - 1);

  std::vector<seeker::Document> docs;
  for (std::size_t d = 0; d < opt.docs; ++d) {
    char id[32];
    std::snprintf(id, sizeof id, "doc-%03zu", d);
    std::string content;
    const std::size_t sentences = n_sent(rng);
    for (std::size_t s = 0; s < sentences; ++s) {
      const std::size_t words = n_words(rng);
      std::uniform_int_distribution<std::size_t> where(1, words - 1);
      const std::size_t entity_at = where(rng);
      std::string sentence;
      for (std::size_t w = 0; w < words; ++w) {
        std::string tok = w == entity_at ? entities[pick_entity(rng)] : vocab[pick_word(rng)];
        if (w == 0) tok[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
        if (!sentence.empty()) sentence += ' ';
        sentence += tok;
      }
      sentence += '.';
      if (!content.empty()) content += ' ';
      content += sentence;
    }
    const std::string& domain = opt.domains[d % opt.domains.size()];
    docs.push_back(seeker::Document::make(id, "https://www." + domain + "/page/" + std::to_string(d),
                                          entities[d % entities.size()] + " (topic) - Encyclopedia", content));
  }
  return docs;
}

std::string perturb(const std::string& sentence, std::size_t edits, WordGen& gen) {
  auto words = seeker::split_whitespace(sentence);
  std::string tail;
  if (!words.empty() && words.back().ends_with('.')) {
    words.back().pop_back();
    tail = ".";
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (!std::isupper(static_cast<unsigned char>(words[i][0]))) candidates.push_back(i);
  }
  std::shuffle(candidates.begin(), candidates.end(), gen.rng());
  for (std::size_t e = 0; e < edits && e < candidates.size(); ++e) words[candidates[e]] = gen.word();
  return seeker::join(words, " ") + tail;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("seeker-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::shared_ptr<seeker::FunctionBackend> uniform_scorer(double nll_per_token) {
  return std::make_shared<seeker::FunctionBackend>(
      [](const seeker::PackedInput&, const seeker::DecodingSpec&, const seeker::NGramSet&) {
        return std::vector<std::string>{};
      },
      [nll_per_token](const seeker::PackedInput&, std::string_view continuation) {
        const std::size_t n = seeker::count_tokens(continuation);
        return std::optional<seeker::ScoreResult>(
            seeker::ScoreResult{nll_per_token * static_cast<double>(n), n});
      },
      "uniform-scorer");
}

}  // namespace fixtures
