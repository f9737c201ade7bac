#pragma once

// Synthetic corpora and test doubles shared by the unit and acceptance suites.

#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seeker/backends.hpp"
#include "seeker/corpus.hpp"
#include "seeker/pipeline.hpp"

namespace fixtures {

/// Lowercase pseudo-words built from two to four consonant-vowel syllables;
/// none of them is an article and collisions are rare.
class WordGen {
 public:
  explicit WordGen(std::uint64_t seed) : rng_(seed) {}
  std::string word();
  std::string capitalized();
  std::vector<std::string> vocabulary(std::size_t n);
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

struct SyntheticCorpusOptions {
  std::size_t docs = 200;
  std::size_t min_sentences = 4;
  std::size_t max_sentences = 8;
  std::size_t min_words = 6;
  std::size_t max_words = 14;
  std::size_t vocabulary = 600;
  std::size_t entities = 60;
  std::vector<std::string> domains = {"alpha.com", "beta.org", "gamma.net", "delta.co.uk", "epsilon.io"};
};

/// Random documents with ids "doc-000", ... Sentences mix vocabulary words with
/// a capitalized entity placed mid-sentence, and end with a period.
std::vector<seeker::Document> synthetic_corpus(std::uint64_t seed, const SyntheticCorpusOptions& opt = {});

/// Replaces `edits` random non-entity words of a sentence with fresh words,
/// keeping the trailing period.
std::string perturb(const std::string& sentence, std::size_t edits, WordGen& gen);

/// A fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Scores every continuation token at a fixed negative log-likelihood.
std::shared_ptr<seeker::FunctionBackend> uniform_scorer(double nll_per_token);

}  // namespace fixtures
