#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace a2net {

// Indices are 0-based everywhere (files and memory).
using ClausePair = std::pair<std::size_t, std::size_t>;  // (emotion, cause)

struct Clause {
  std::vector<std::string> tokens;
  std::size_t index = 0;

  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Document {
  std::uint64_t doc_id = 0;
  std::vector<Clause> clauses;
  std::set<std::size_t> emotions;
  std::set<std::size_t> causes;
  std::set<ClausePair> pairs;

  std::size_t size() const { return clauses.size(); }
  friend bool operator==(const Document&, const Document&) = default;
};

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnknown = 1;

  Vocabulary();
  static Vocabulary build(const std::vector<Document>& docs);
  // Rebuilds from the id-ordered token list (ids 0 and 1 included).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t id(const std::string& token) const;
  std::size_t add(const std::string& token);
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> ids_;
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws DataError naming the doc_id when an invariant is violated.
void validate_document(const Document& doc);

Corpus parse_corpus(const std::filesystem::path& path);
Corpus parse_corpus_text(const std::string& jsonl);
std::string serialize_document(const Document& doc);
std::string serialize_corpus(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct IntRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

struct SynthConfig {
  std::size_t num_docs = 600;
  IntRange clauses_per_doc{4, 10};
  IntRange tokens_per_clause{3, 8};
  std::size_t vocab_size = 200;
  IntRange pair_distance{0, 2};
  IntRange pairs_per_doc{1, 1};
  // Distinct emotion/cause trigger families; pair k uses family k in both
  // its emotion and its cause clause.
  std::size_t trigger_types = 4;
};

// Throws DataError on an inconsistent configuration.
void validate_synth_config(const SynthConfig& cfg);

std::string emotion_trigger(std::size_t type);
std::string cause_trigger(std::size_t type);

// Pure function of (cfg, seed).
Corpus generate_synthetic(const SynthConfig& cfg, std::uint64_t seed);

// Rule-based oracle: recovers planted labels by scanning trigger tokens.
Document recover_planted_labels(const Document& doc);

struct Fold {
  std::vector<std::size_t> train;  // indices into corpus.documents
  std::vector<std::size_t> test;
};

std::vector<Fold> split_folds(std::size_t corpus_size, std::size_t k, std::uint64_t seed);

std::vector<Document> select(const Corpus& corpus, const std::vector<std::size_t>& indices);

}  // namespace a2net
