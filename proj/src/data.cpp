#include "a2net/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace a2net {

using ojson = nlohmann::ordered_json;

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

Vocabulary Vocabulary::build(const std::vector<Document>& docs) {
  Vocabulary v;
  for (const auto& d : docs) {
    for (const auto& c : d.clauses) {
      for (const auto& t : c.tokens) v.add(t);
    }
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2) throw DataError("vocabulary: reserved ids 0 and 1 missing");
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.add(tokens[i]) != i) throw DataError("vocabulary: duplicate token '" + tokens[i] + "'");
  }
  return v;
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknown : it->second;
}

std::size_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

void validate_document(const Document& doc) {
  const auto n = doc.clauses.size();
  const auto where = "doc_id " + std::to_string(doc.doc_id) + ": ";
  if (n == 0) throw DataError(where + "document has no clauses");
  for (std::size_t i = 0; i < n; ++i) {
    if (doc.clauses[i].tokens.empty()) throw DataError(where + "clause " + std::to_string(i) + " is empty");
    if (doc.clauses[i].index != i) throw DataError(where + "clause index mismatch at " + std::to_string(i));
  }
  auto check = [&](std::size_t idx, const char* what) {
    if (idx >= n) {
      throw DataError(where + what + " index " + std::to_string(idx) + " out of range for " +
                      std::to_string(n) + " clauses");
    }
  };
  for (auto e : doc.emotions) check(e, "emotion");
  for (auto c : doc.causes) check(c, "cause");
  for (const auto& [e, c] : doc.pairs) {
    check(e, "pair emotion");
    check(c, "pair cause");
    if (!doc.emotions.contains(e)) {
      throw DataError(where + "pair (" + std::to_string(e) + "," + std::to_string(c) +
                      ") emotion missing from emotions");
    }
    if (!doc.causes.contains(c)) {
      throw DataError(where + "pair (" + std::to_string(e) + "," + std::to_string(c) +
                      ") cause missing from causes");
    }
  }
}

namespace {

Document document_from_json(const ojson& j) {
  Document d;
  d.doc_id = j.at("doc_id").get<std::uint64_t>();
  const auto& clauses = j.at("clauses");
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    d.clauses.push_back(Clause{clauses[i].get<std::vector<std::string>>(), i});
  }
  for (const auto& e : j.at("emotions")) d.emotions.insert(e.get<std::size_t>());
  for (const auto& c : j.at("causes")) d.causes.insert(c.get<std::size_t>());
  for (const auto& p : j.at("pairs")) {
    if (!p.is_array() || p.size() != 2) throw DataError("pair must be [emotion, cause]");
    d.pairs.emplace(p[0].get<std::size_t>(), p[1].get<std::size_t>());
  }
  return d;
}

Corpus parse_stream(std::istream& in) {
  Corpus corpus;
  std::set<std::uint64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Document doc;
    try {
      doc = document_from_json(ojson::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed document: " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    validate_document(doc);
    if (!seen.insert(doc.doc_id).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate doc_id " + std::to_string(doc.doc_id));
    }
    corpus.documents.push_back(std::move(doc));
  }
  corpus.vocabulary = Vocabulary::build(corpus.documents);
  return corpus;
}

}  // namespace

Corpus parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return parse_stream(in);
}

Corpus parse_corpus_text(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return parse_stream(in);
}

std::string serialize_document(const Document& doc) {
  ojson j;
  j["doc_id"] = doc.doc_id;
  j["clauses"] = ojson::array();
  for (const auto& c : doc.clauses) j["clauses"].push_back(c.tokens);
  j["emotions"] = std::vector<std::size_t>(doc.emotions.begin(), doc.emotions.end());
  j["causes"] = std::vector<std::size_t>(doc.causes.begin(), doc.causes.end());
  j["pairs"] = ojson::array();
  for (const auto& [e, c] : doc.pairs) j["pairs"].push_back({e, c});
  return j.dump();
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.documents) {
    out += serialize_document(d);
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus " + path.string());
  out << serialize_corpus(corpus);
}

void validate_synth_config(const SynthConfig& cfg) {
  auto range_ok = [](const IntRange& r, const char* name) {
    if (r.min > r.max) throw DataError(std::string("synth: empty range for ") + name);
  };
  range_ok(cfg.clauses_per_doc, "clauses_per_doc");
  range_ok(cfg.tokens_per_clause, "tokens_per_clause");
  range_ok(cfg.pair_distance, "pair_distance");
  range_ok(cfg.pairs_per_doc, "pairs_per_doc");
  if (cfg.vocab_size < 16) throw DataError("synth: vocab_size must be >= 16");
  if (cfg.trigger_types == 0 || 2 * cfg.trigger_types >= cfg.vocab_size) {
    throw DataError("synth: trigger_types must be in [1, vocab_size/2)");
  }
  if (cfg.clauses_per_doc.min == 0) throw DataError("synth: clauses_per_doc min must be >= 1");
  if (cfg.tokens_per_clause.min == 0) throw DataError("synth: tokens_per_clause min must be >= 1");
  if (cfg.clauses_per_doc.max < cfg.pair_distance.max) {
    throw DataError("synth: clauses_per_doc max < pair_distance max");
  }
  if (cfg.pairs_per_doc.max > 0 && cfg.clauses_per_doc.min <= cfg.pair_distance.min) {
    throw DataError("synth: clauses_per_doc min must exceed pair_distance min");
  }
  if (cfg.pairs_per_doc.max > cfg.trigger_types) {
    throw DataError("synth: pairs_per_doc max exceeds trigger_types");
  }
}

std::string emotion_trigger(std::size_t type) { return "emo" + std::to_string(type); }
std::string cause_trigger(std::size_t type) { return "cau" + std::to_string(type); }

Corpus generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  validate_synth_config(cfg);
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t fillers = cfg.vocab_size - 2 * cfg.trigger_types;

  Corpus corpus;
  for (std::size_t d = 0; d < cfg.num_docs; ++d) {
    Document doc;
    doc.doc_id = d;
    const auto n = uniform(cfg.clauses_per_doc.min, cfg.clauses_per_doc.max);
    for (std::size_t i = 0; i < n; ++i) {
      Clause c;
      c.index = i;
      const auto len = uniform(cfg.tokens_per_clause.min, cfg.tokens_per_clause.max);
      for (std::size_t t = 0; t < len; ++t) c.tokens.push_back("w" + std::to_string(uniform(0, fillers - 1)));
      doc.clauses.push_back(std::move(c));
    }

    std::vector<std::size_t> types(cfg.trigger_types);
    std::iota(types.begin(), types.end(), 0);
    std::shuffle(types.begin(), types.end(), rng);
    const auto num_pairs = uniform(cfg.pairs_per_doc.min, cfg.pairs_per_doc.max);
    for (std::size_t p = 0; p < num_pairs; ++p) {
      const auto dist = uniform(cfg.pair_distance.min, std::min(cfg.pair_distance.max, n - 1));
      std::size_t emo = 0;
      std::size_t cause = 0;
      if (dist == 0) {
        emo = cause = uniform(0, n - 1);
      } else if (uniform(0, 1) == 0) {
        emo = uniform(dist, n - 1);
        cause = emo - dist;
      } else {
        emo = uniform(0, n - 1 - dist);
        cause = emo + dist;
      }
      auto plant = [&](std::size_t clause, std::string token) {
        auto& toks = doc.clauses[clause].tokens;
        const auto pos = uniform(0, toks.size());
        toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(pos), std::move(token));
      };
      plant(emo, emotion_trigger(types[p]));
      plant(cause, cause_trigger(types[p]));
      doc.pairs.emplace(emo, cause);
      doc.emotions.insert(emo);
      doc.causes.insert(cause);
    }
    corpus.documents.push_back(std::move(doc));
  }
  corpus.vocabulary = Vocabulary::build(corpus.documents);
  return corpus;
}

Document recover_planted_labels(const Document& doc) {
  Document out = doc;
  out.emotions.clear();
  out.causes.clear();
  out.pairs.clear();
  std::map<std::string, std::vector<std::size_t>> emo_at, cause_at;
  for (const auto& c : doc.clauses) {
    for (const auto& t : c.tokens) {
      if (t.rfind("emo", 0) == 0) emo_at[t.substr(3)].push_back(c.index);
      if (t.rfind("cau", 0) == 0) cause_at[t.substr(3)].push_back(c.index);
    }
  }
  for (const auto& [type, emos] : emo_at) {
    auto it = cause_at.find(type);
    if (it == cause_at.end()) continue;
    for (auto e : emos) {
      for (auto c : it->second) {
        out.pairs.emplace(e, c);
        out.emotions.insert(e);
        out.causes.insert(c);
      }
    }
  }
  return out;
}

std::vector<Fold> split_folds(std::size_t corpus_size, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DataError("folds: k must be >= 2");
  if (k > corpus_size) {
    throw DataError("folds: k=" + std::to_string(k) + " exceeds corpus size " + std::to_string(corpus_size));
  }
  std::vector<std::size_t> perm(corpus_size);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Fold> folds(k);
  const std::size_t base = corpus_size / k;
  const std::size_t extra = corpus_size % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].test.assign(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(start + len));
    std::sort(folds[f].test.begin(), folds[f].test.end());
    start += len;
  }
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(), folds[g].test.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

std::vector<Document> select(const Corpus& corpus, const std::vector<std::size_t>& indices) {
  std::vector<Document> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(corpus.documents.at(i));
  return out;
}

}  // namespace a2net
