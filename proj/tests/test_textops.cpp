#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "seeker/errors.hpp"
#include "seeker/textops.hpp"

using namespace seeker;

namespace {

std::string strip_ws(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

std::string random_ascii_text(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> pool = {
      "The", "the", "a", "An", "cat", "Dr.", "Mr.", "e.g.", "U.S.", "sat.", "ran!", "why?", "\"quoted.\"",
      "(aside.)", "x-ray", "it's", "A.", "end...", "\n\n", "\n", "\t", "Obama", "Hawaii,", "42", "3.14", "--",
      "?!", "Paris.", "_under_", "co-op"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (!out.empty()) out += ' ';
    out += pool[pick(rng)];
  }
  return out;
}

std::vector<std::string> surfaces(const std::vector<EntitySpan>& spans) {
  std::vector<std::string> out;
  for (const auto& s : spans) out.push_back(s.surface);
  return out;
}

}  // namespace

TEST_CASE("normalize lowercases, strips punctuation and drops articles") {
  CHECK(normalize("The cat sat.").tokens == std::vector<std::string>{"cat", "sat"});
  CHECK(normalize("").tokens.empty());
  CHECK(normalize("Obama was born in Hawaii").tokens ==
        std::vector<std::string>{"obama", "was", "born", "in", "hawaii"});
  CHECK(normalize("An apple, a day!").tokens == std::vector<std::string>{"apple", "day"});
  CHECK(normalize("...  ---").tokens.empty());
}

TEST_CASE("normalize offsets point at token starts and increase strictly") {
  const std::string text = "  The (quick) brown  fox, a dog.";
  const auto n = normalize(text);
  REQUIRE(n.tokens.size() == n.source_offsets.size());
  for (std::size_t i = 0; i < n.tokens.size(); ++i) {
    CHECK(n.source_offsets[i] < text.size());
    if (i) CHECK(n.source_offsets[i] > n.source_offsets[i - 1]);
    CHECK_FALSE(n.tokens[i].empty());
  }
  CHECK(text.substr(n.source_offsets[0], 7) == "(quick)");
}

TEST_CASE("normalize agrees with the regex reference and is idempotent on random ASCII text") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto text = random_ascii_text(rng, 1 + i % 20);
    const auto tokens = normalize(text).tokens;
    CHECK(tokens == oracle::normalize(text));
    CHECK(normalize(join(tokens, " ")).tokens == tokens);
  }
}

TEST_CASE("f1_overlap worked values") {
  CHECK(f1_overlap("obama born hawaii", "obama was born in hawaii") == 0.75);
  CHECK(f1_overlap("same words here", "same words here") == 1.0);
  CHECK(f1_overlap("alpha beta", "gamma delta") == 0.0);
  CHECK(f1_overlap("", "") == 0.0);
  CHECK(f1_overlap("word", "") == 0.0);
  // Duplicates count once per matching occurrence.
  CHECK(f1_overlap("x x x", "x y") == doctest::Approx(2.0 * 1 / 5));
}

TEST_CASE("f1_overlap is symmetric, reflexive and matches the brute-force oracle") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(0, 12), tok(0, 7);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> a, b;
    for (int k = len(rng); k > 0; --k) a.push_back("t" + std::to_string(tok(rng)));
    for (int k = len(rng); k > 0; --k) b.push_back("t" + std::to_string(tok(rng)));
    CHECK(f1_overlap(a, b) == f1_overlap(b, a));
    CHECK(std::abs(f1_overlap(a, b) - oracle::f1(a, b)) <= 1e-12);
    if (!a.empty()) CHECK(f1_overlap(a, a) == 1.0);
  }
}

TEST_CASE("split_sentences examples") {
  auto s = split_sentences("A b. C d.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "A b.");
  CHECK(s[1].text == "C d.");
  CHECK(s[1].index == 1);
  CHECK(split_sentences("Dr. Smith arrived.").size() == 1);
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   \n ").empty());
}

TEST_CASE("split_sentences handles closers, runs of terminators and paragraph breaks") {
  auto s = split_sentences("He said \"stop.\" Then left?! Really...\n\nNew paragraph without end");
  REQUIRE(s.size() == 4);
  CHECK(s[0].text == "He said \"stop.\"");
  CHECK(s[1].text == "Then left?!");
  CHECK(s[2].text == "Really...");
  CHECK(s[3].text == "New paragraph without end");
  // A period inside a number or word does not split.
  CHECK(split_sentences("Pi is 3.14 roughly. Done.").size() == 2);
  // Abbreviations are matched case-insensitively and ignore leading openers.
  CHECK(split_sentences("See (e.g. this) case. And MR. Jones.").size() == 2);
  CHECK(split_sentences("Born in the U.S. in May.").size() == 1);
}

TEST_CASE("split_sentences respects a custom abbreviation list") {
  const AbbreviationList none{std::unordered_set<std::string>{}};
  CHECK(split_sentences("Dr. Smith arrived.", "", none).size() == 2);
  const AbbreviationList custom{std::unordered_set<std::string>{"approx."}};
  CHECK(split_sentences("It is approx. ten. Yes.", "", custom).size() == 2);
}

TEST_CASE("shipped abbreviation file matches the builtin list") {
  const auto file = AbbreviationList::load(std::filesystem::path(SEEKER_DATA_DIR) / "abbreviations.txt");
  for (const char* w : {"dr.", "mr.", "e.g.", "u.s.", "inc."}) {
    CHECK(file.contains(w));
    CHECK(AbbreviationList::builtin().contains(w));
  }
  CHECK_THROWS_AS(AbbreviationList::load("/nonexistent/abbrev.txt"), IoError);
}

TEST_CASE("split_sentences spans cover the non-whitespace input contiguously") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto text = random_ascii_text(rng, static_cast<std::size_t>(i % 40));
    const auto spans = split_sentences(text, "d");
    std::string joined;
    std::size_t prev_end = 0;
    for (std::size_t k = 0; k < spans.size(); ++k) {
      const auto& sp = spans[k];
      CHECK(sp.index == k);
      CHECK(sp.doc_id == "d");
      CHECK(sp.begin >= prev_end);
      CHECK(sp.end > sp.begin);
      CHECK(text.substr(sp.begin, sp.end - sp.begin) == sp.text);
      CHECK(sp.token_count == normalize(sp.text).size());
      CHECK(strip_ws(text.substr(prev_end, sp.begin - prev_end)).empty());
      prev_end = sp.end;
      joined += sp.text;
    }
    CHECK(strip_ws(joined) == strip_ws(text));
  }
}

TEST_CASE("ngrams examples and size property") {
  const std::vector<std::string> abcd = {"a", "b", "c", "d"};
  CHECK(ngrams(abcd, 3).grams == std::set<NGram>{{"a", "b", "c"}, {"b", "c", "d"}});
  CHECK(ngrams(std::vector<std::string>{"a", "b"}, 3).grams.empty());
  CHECK(ngrams(std::vector<std::string>{"a", "b", "a", "b"}, 2).grams == std::set<NGram>{{"a", "b"}, {"b", "a"}});
  CHECK_THROWS_AS(ngrams(abcd, 0), PreconditionError);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(0, 15), tok(0, 30), n(1, 5);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> toks;
    for (int k = len(rng); k > 0; --k) toks.push_back(std::to_string(tok(rng)));
    const std::size_t order = static_cast<std::size_t>(n(rng));
    const auto set = ngrams(toks, order);
    CHECK(set.n == order);
    CHECK(set.grams == oracle::grams(toks, order));
    CHECK(set.grams.size() <= (toks.size() >= order ? toks.size() - order + 1 : 0));
    for (const auto& g : set.grams) CHECK(g.size() == order);
  }
}

TEST_CASE("extract_entities capitalization heuristic") {
  CHECK(surfaces(extract_entities("I met Barack Obama in Chicago")) ==
        std::vector<std::string>{"Barack Obama", "Chicago"});
  CHECK(extract_entities("the quick fox").empty());
  CHECK(surfaces(extract_entities("Paris is large. Paris wins.")) == std::vector<std::string>{"Paris", "Paris"});
  // A lone sentence-initial word with no other evidence is not an entity.
  CHECK(extract_entities("Yesterday we walked.").empty());
  // ... unless the companion text shows it capitalized mid-sentence.
  CHECK(surfaces(extract_entities("Tesla builds cars", "Shares of Tesla rose")) == std::vector<std::string>{"Tesla"});
  // Runs break after trailing punctuation.
  CHECK(surfaces(extract_entities("We saw Rome, Milan and Turin.")) ==
        std::vector<std::string>{"Rome", "Milan", "Turin"});
}

TEST_CASE("entity spans are substrings at their offsets") {
  const std::string text = "Then \"Ada Lovelace\" met Charles Babbage in London. London was cold.";
  for (const auto& e : extract_entities(text)) {
    CHECK_FALSE(e.surface.empty());
    CHECK(text.substr(e.begin, e.end - e.begin) == e.surface);
  }
  CHECK(surfaces(extract_entities(text)) ==
        std::vector<std::string>{"Ada Lovelace", "Charles Babbage", "London", "London"});
}

TEST_CASE("shared_entity examples") {
  CHECK(shared_entity("Tesla builds cars", "Tesla reported profits"));
  CHECK_FALSE(shared_entity("cats sleep", "dogs bark"));
  CHECK(shared_entity("Obama spoke", "President Obama waved"));
  CHECK(shared_entity("we visited paris with Marie", "Yesterday MARIE stayed home"));
  CHECK_FALSE(shared_entity("I like Rome", "You like Paris"));
}

namespace {
class FixedProvider final : public EntityProvider {
 public:
  std::vector<EntitySpan> extract(std::string_view text, std::string_view) const override {
    std::vector<EntitySpan> out;
    if (auto p = text.find("zeta"); p != std::string_view::npos) out.push_back({"zeta", "THING", p, p + 4});
    return out;
  }
};
}  // namespace

TEST_CASE("entity provider is pluggable") {
  const FixedProvider p;
  CHECK(shared_entity("the zeta function", "a zeta value", p));
  CHECK_FALSE(shared_entity("Tesla builds cars", "Tesla reported profits", p));
  CHECK(extract_entities("zeta", {}, p).at(0).label == std::optional<std::string>("THING"));
}

TEST_CASE("string helpers") {
  CHECK(trim("  x y \n") == "x y");
  CHECK(split_whitespace(" a\tb\n c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(join({"a", "b"}, ", ") == "a, b");
  CHECK(to_lower_ascii("MiXeD É") == "mixed É");
}
