#include "seeker/textops.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "seeker/errors.hpp"

namespace seeker {

#include "abbreviations.inc"

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// ASCII punctuation, i.e. Python's string.punctuation.
bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 128 && ((u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
                     (u >= 123 && u <= 126));
}

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }

bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{'; }

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

NormalizedTokens normalize(std::string_view text) {
  NormalizedTokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    std::string tok;
    while (i < text.size() && !is_space(text[i])) {
      char c = text[i++];
      if (is_punct(c)) continue;
      if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
      tok.push_back(c);
    }
    if (!tok.empty() && !is_article(tok)) {
      out.tokens.push_back(std::move(tok));
      out.source_offsets.push_back(start);
    }
  }
  return out;
}

double f1_overlap(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return 0.0;
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& t : gold) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(pred.size() + gold.size());
}

double f1_overlap(const NormalizedTokens& pred, const NormalizedTokens& gold) {
  return f1_overlap(pred.tokens, gold.tokens);
}

double f1_overlap(std::string_view pred, std::string_view gold) {
  return f1_overlap(normalize(pred), normalize(gold));
}

// ---------------------------------------------------------------------------
// Sentence splitting

AbbreviationList::AbbreviationList(std::unordered_set<std::string> entries)
    : entries_(std::move(entries)) {}

namespace {

AbbreviationList parse_abbreviations(std::istream& in) {
  std::unordered_set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    entries.insert(to_lower_ascii(t));
  }
  return AbbreviationList(std::move(entries));
}

}  // namespace

AbbreviationList AbbreviationList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open abbreviation list " + path.string());
  return parse_abbreviations(in);
}

const AbbreviationList& AbbreviationList::builtin() {
  static const AbbreviationList list = [] {
    std::istringstream in(kBuiltinAbbreviations);
    return parse_abbreviations(in);
  }();
  return list;
}

bool AbbreviationList::contains(std::string_view word_lower) const {
  return entries_.count(std::string(word_lower)) != 0;
}

namespace {

// Is there a blank line starting at the newline at `pos`?
bool paragraph_break_at(std::string_view text, std::size_t pos) {
  if (text[pos] != '\n') return false;
  for (std::size_t k = pos + 1; k < text.size(); ++k) {
    if (text[k] == '\n') return true;
    if (!is_space(text[k])) return false;
  }
  return false;
}

// The word ending at text[period] (inclusive), without leading openers.
std::string word_ending_at(std::string_view text, std::size_t floor, std::size_t period) {
  std::size_t b = period;
  while (b > floor && !is_space(text[b - 1])) --b;
  while (b < period && is_opener(text[b])) ++b;
  return to_lower_ascii(text.substr(b, period + 1 - b));
}

}  // namespace

std::vector<SentenceSpan> split_sentences(std::string_view text, std::string_view doc_id,
                                          const AbbreviationList& abbrev) {
  std::vector<SentenceSpan> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t start = i;
    std::size_t end = n;
    std::size_t j = i;
    while (j < n) {
      if (paragraph_break_at(text, j)) {
        end = j;
        break;
      }
      if (!is_terminator(text[j])) {
        ++j;
        continue;
      }
      std::size_t k = j;
      while (k < n && is_terminator(text[k])) ++k;
      const bool lone_period = (k - j == 1) && text[j] == '.';
      while (k < n && is_closer(text[k])) ++k;
      if (k == n || is_space(text[k])) {
        if (!(lone_period && abbrev.contains(word_ending_at(text, start, j)))) {
          end = k;
          break;
        }
      }
      j = k;
    }
    std::size_t e = end;
    while (e > start && is_space(text[e - 1])) --e;
    SentenceSpan span;
    span.doc_id = std::string(doc_id);
    span.index = out.size();
    span.text = std::string(text.substr(start, e - start));
    span.token_count = normalize(span.text).size();
    span.begin = start;
    span.end = e;
    out.push_back(std::move(span));
    i = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// n-grams

void NGramSet::merge(const NGramSet& other) {
  if (other.grams.empty()) return;
  if (grams.empty() && n == 0) n = other.n;
  if (other.n != n) throw PreconditionError("NGramSet::merge: mismatched n");
  grams.insert(other.grams.begin(), other.grams.end());
}

NGramSet ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  if (n == 0) throw PreconditionError("ngrams: n must be >= 1");
  NGramSet out;
  out.n = n;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.grams.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return out;
}

NGramSet ngrams(const NormalizedTokens& tokens, std::size_t n) { return ngrams(tokens.tokens, n); }

// ---------------------------------------------------------------------------
// Entities

namespace {

// Sentence-initial words that are capitalized only by position.
bool is_function_word(std::string_view core) {
  static const std::unordered_set<std::string> words = {
      "a",     "about", "after",  "all",     "also",  "an",    "and",   "are",   "as",    "at",   "before",
      "but",   "by",    "can",    "could",   "did",   "do",    "does",  "each",  "every", "for",  "from",
      "he",    "her",   "here",   "his",     "how",   "however", "if",  "in",    "is",    "it",   "its",
      "just",  "let",   "many",   "maybe",   "most",  "my",    "no",    "not",   "of",    "oh",   "on",
      "one",   "or",    "our",    "she",     "so",    "some",  "sure",  "that",  "the",   "their", "then",
      "there", "these", "they",   "this",    "those", "to",    "was",   "we",    "well",  "were", "what",
      "when",  "where", "which",  "while",   "who",   "why",   "will",  "with",  "would", "yes",  "you",
      "your"};
  return words.count(to_lower_ascii(core)) != 0;
}

struct Word {
  std::size_t core_begin;
  std::size_t core_end;
  bool trailing_punct;
  bool leading_punct;
  bool sentence_initial;
  bool capitalized;
};

std::vector<std::vector<Word>> words_by_sentence(std::string_view text) {
  std::vector<std::vector<Word>> out;
  for (const auto& s : split_sentences(text)) {
    std::vector<Word> words;
    std::size_t i = s.begin;
    while (i < s.end) {
      while (i < s.end && is_space(text[i])) ++i;
      std::size_t j = i;
      while (j < s.end && !is_space(text[j])) ++j;
      if (j == i) break;
      std::size_t cb = i, ce = j;
      while (cb < ce && is_opener(text[cb])) ++cb;
      while (ce > cb && (is_closer(text[ce - 1]) || is_terminator(text[ce - 1]) || text[ce - 1] == ',' ||
                         text[ce - 1] == ';' || text[ce - 1] == ':'))
        --ce;
      if (ce > cb) {
        const std::string_view core = text.substr(cb, ce - cb);
        const bool pronoun_i = core == "I" || core.starts_with("I'");
        const bool initial = words.empty();
        const bool positional = initial && is_function_word(core);
        words.push_back(Word{cb, ce, ce < j, cb > i, initial, is_upper(core[0]) && !pronoun_i && !positional});
      }
      i = j;
    }
    out.push_back(std::move(words));
  }
  return out;
}

struct CapEvidence {
  std::map<std::string, std::size_t, std::less<>> count;
  std::set<std::string, std::less<>> mid_sentence;

  void add(std::string_view text) {
    for (const auto& sentence : words_by_sentence(text)) {
      for (const auto& w : sentence) {
        if (!w.capitalized) continue;
        std::string core(text.substr(w.core_begin, w.core_end - w.core_begin));
        if (!w.sentence_initial) mid_sentence.insert(core);
        ++count[core];
      }
    }
  }
};

}  // namespace

std::vector<EntitySpan> CapitalizationEntityProvider::extract(std::string_view text,
                                                              std::string_view companion) const {
  CapEvidence evidence;
  evidence.add(text);
  if (!companion.empty()) evidence.add(companion);

  std::vector<EntitySpan> out;
  for (const auto& sentence : words_by_sentence(text)) {
    std::size_t w = 0;
    while (w < sentence.size()) {
      if (!sentence[w].capitalized) {
        ++w;
        continue;
      }
      std::size_t last = w;
      while (!sentence[last].trailing_punct && last + 1 < sentence.size() && sentence[last + 1].capitalized &&
             !sentence[last + 1].leading_punct)
        ++last;
      const std::size_t b = sentence[w].core_begin;
      const std::size_t e = sentence[last].core_end;
      std::string surface(text.substr(b, e - b));
      bool keep = true;
      if (w == 0 && last == 0) {
        auto it = evidence.count.find(surface);
        const std::size_t seen = it == evidence.count.end() ? 0 : it->second;
        keep = seen >= 2 || evidence.mid_sentence.count(surface) != 0;
      }
      if (keep) out.push_back(EntitySpan{std::move(surface), std::nullopt, b, e});
      w = last + 1;
    }
  }
  return out;
}

const EntityProvider& default_entity_provider() {
  static const CapitalizationEntityProvider provider;
  return provider;
}

std::vector<EntitySpan> extract_entities(std::string_view text, std::string_view companion,
                                         const EntityProvider& provider) {
  return provider.extract(text, companion);
}

namespace {

std::set<std::string> entity_keys(const std::vector<EntitySpan>& spans) {
  std::set<std::string> keys;
  for (const auto& s : spans) {
    keys.insert(to_lower_ascii(s.surface));
    for (auto& part : split_whitespace(s.surface)) keys.insert(to_lower_ascii(part));
  }
  return keys;
}

}  // namespace

bool shared_entity(std::string_view a, std::string_view b, const EntityProvider& provider) {
  const auto ka = entity_keys(provider.extract(a, b));
  const auto kb = entity_keys(provider.extract(b, a));
  return std::any_of(ka.begin(), ka.end(), [&](const std::string& k) { return kb.count(k) != 0; });
}

}  // namespace seeker
