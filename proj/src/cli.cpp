#include "a2net/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "a2net/train.hpp"

namespace a2net {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || v[0] == '-') {
    throw std::invalid_argument("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(n);
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  return d;
}

void write_key_values(const fs::path& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

const std::map<std::string, std::string>& help_text() {
  static const std::map<std::string, std::string> h = {
      {"corpus", "JSONL corpus path"},
      {"dev-corpus", "JSONL corpus used for model selection"},
      {"embeddings", "precomputed clause embedding file (A2NE)"},
      {"checkpoint", "checkpoint path"},
      {"out", "output path (directory for train/eval, file for synth/folds)"},
      {"seed", "random seed"},
      {"hidden", "partition filter hidden size"},
      {"dim", "clause representation width"},
      {"lambda1", "weight of the auxiliary emotion/cause loss"},
      {"lambda2", "weight of the inter-task alignment loss"},
      {"lr", "learning rate"},
      {"batch", "documents per optimizer step"},
      {"epochs", "training epochs"},
      {"dropout", "dropout rate"},
      {"threshold", "decoding threshold"},
      {"encoding", "pfn|shared|parallel"},
      {"ita", "both|p2e|e2p|off"},
      {"aux", "on|off"},
      {"folds", "number of cross-validation folds"},
      {"eps", "finite-difference step"},
      {"tol", "maximum relative gradient error"},
      {"clauses", "clauses in the random gradcheck document"},
      {"adam-eps", "AdamW epsilon"},
      {"beta1", "AdamW first-moment decay"},
      {"beta2", "AdamW second-moment decay"},
      {"weight-decay", "decoupled weight decay"},
      {"averaging", "micro|macro"},
      {"detach-side", "none|pseudo|pair: stop gradients through one side of the alignment loss"},
      {"dim-pos", "relative position embedding width"},
      {"embedding-mode", "lookup|precomputed"},
      {"ffn-hidden", "hidden width of head and mask FFNs (0 = hidden/2)"},
      {"literal-loss", "on|off: positive-only loss -sum y log p instead of binary cross-entropy"},
      {"mask-dim", "soft-mask projection width"},
      {"max-offset", "largest relative clause offset with its own embedding"},
      {"share-gate-params", "on|off: tie input gates to forget gates"},
      {"stop-at-dev-f1", "stop once dev ECPE F1 reaches this value"},
      {"workers", "threads for per-document gradient accumulation"},
      {"num-docs", "documents to generate"},
      {"min-clauses", "fewest clauses per document"},
      {"max-clauses", "most clauses per document"},
      {"min-tokens", "fewest tokens per clause"},
      {"max-tokens", "most tokens per clause"},
      {"vocab-size", "filler plus trigger vocabulary size"},
      {"min-distance", "smallest emotion-to-cause clause distance"},
      {"max-distance", "largest emotion-to-cause clause distance"},
      {"min-pairs", "fewest pairs per document"},
      {"max-pairs", "most pairs per document"},
      {"trigger-types", "distinct emotion/cause trigger families"},
  };
  return h;
}

std::vector<std::string> train_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : to_key_values(TrainConfig{})) keys.push_back(k);
  return keys;
}

std::vector<std::string> synth_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : synth_key_values(SynthConfig{})) keys.push_back(k);
  return keys;
}

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> flags;
  std::vector<std::string> keys;
  std::string config_path;

  void bind(const std::vector<std::string>& names) {
    for (const auto& k : names) {
      if (std::find(keys.begin(), keys.end(), k) != keys.end()) continue;
      keys.push_back(k);
      auto it = help_text().find(k);
      app->add_option("--" + k, flags[k], it == help_text().end() ? "" : it->second);
    }
  }

  // defaults < config file < flags
  std::map<std::string, std::string> merged(const std::set<std::string>& known) const {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) {
      for (const auto& [k, v] : read_key_value_file(config_path)) {
        if (!known.contains(k)) throw UsageError("unknown config key '" + k + "' in " + config_path);
        if (std::find(keys.begin(), keys.end(), k) != keys.end()) kv[k] = v;
      }
    }
    for (const auto& k : keys) {
      if (app->get_option("--" + k)->count() > 0) kv[k] = flags.at(k);
    }
    return kv;
  }
};

std::string take(std::map<std::string, std::string>& kv, const std::string& key, std::string fallback = "") {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  auto v = it->second;
  kv.erase(it);
  return v;
}

TrainConfig train_config_from(std::map<std::string, std::string> kv, TrainConfig cfg = {}) {
  const auto unknown = apply_key_values(cfg, kv);
  if (!unknown.empty()) throw UsageError("unsupported key '" + unknown.front() + "'");
  validate(cfg);
  return cfg;
}

int cmd_synth(std::map<std::string, std::string> kv, std::ostream& out) {
  const auto path = take(kv, "out");
  const auto seed = to_size("seed", take(kv, "seed", "0"));
  SynthConfig cfg;
  if (const auto unknown = apply_synth_key_values(cfg, kv); !unknown.empty()) {
    throw UsageError("unsupported key '" + unknown.front() + "'");
  }
  const auto corpus = generate_synthetic(cfg, seed);
  if (path.empty()) {
    out << serialize_corpus(corpus);
    return 0;
  }
  write_corpus(corpus, path);
  auto echo = synth_key_values(cfg);
  echo["seed"] = std::to_string(seed);
  echo["out"] = path;
  write_key_values(path + ".config", echo);
  out << "wrote " << corpus.documents.size() << " documents to " << path << '\n';
  return 0;
}

std::shared_ptr<const EmbeddingStore> load_embeddings(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const EmbeddingStore>(read_embeddings(path));
}

int cmd_train(std::map<std::string, std::string> kv, std::ostream& out) {
  const auto corpus_path = take(kv, "corpus");
  if (corpus_path.empty()) throw UsageError("train requires --corpus");
  const auto dev_path = take(kv, "dev-corpus");
  const auto embeddings_path = take(kv, "embeddings");
  const fs::path out_dir = take(kv, "out", "a2net_run");
  const auto checkpoint_path = take(kv, "checkpoint", (out_dir / "checkpoint.a2ck").string());

  auto embeddings = load_embeddings(embeddings_path);
  if (embeddings) {
    if (!kv.contains("embedding-mode")) kv["embedding-mode"] = "precomputed";
    if (!kv.contains("dim")) kv["dim"] = std::to_string(embeddings->dim);
  }
  const auto cfg = train_config_from(kv);
  if (cfg.model.embedding == EmbeddingMode::kPrecomputed && !embeddings) {
    throw std::invalid_argument("precomputed embedding mode requires --embeddings");
  }

  const auto corpus = parse_corpus(corpus_path);
  std::vector<Document> dev;
  if (!dev_path.empty()) dev = parse_corpus(dev_path).documents;

  fs::create_directories(out_dir);
  auto echo = to_key_values(cfg);
  echo["corpus"] = corpus_path;
  echo["dev-corpus"] = dev_path;
  echo["embeddings"] = embeddings_path;
  echo["out"] = out_dir.string();
  echo["checkpoint"] = checkpoint_path;
  write_key_values(out_dir / "effective_config.txt", echo);

  const auto result = fit(corpus.documents, dev, cfg, embeddings);
  {
    std::ofstream log(out_dir / "train_log.jsonl");
    for (const auto& e : result.log) log << to_json(e).dump() << '\n';
  }
  save_checkpoint(checkpoint_path, *result.model, cfg);

  nlohmann::ordered_json summary;
  summary["epochs_run"] = result.log.size();
  summary["best_epoch"] = result.best_epoch;
  summary["checkpoint"] = checkpoint_path;
  if (!result.log.empty()) summary["final_loss"] = result.log.back().mean_loss.total;
  out << summary.dump() << '\n';
  return 0;
}

int cmd_eval(std::map<std::string, std::string> kv, std::ostream& out, std::ostream& err) {
  const auto corpus_path = take(kv, "corpus");
  const auto checkpoint_path = take(kv, "checkpoint");
  if (corpus_path.empty() || checkpoint_path.empty()) throw UsageError("eval requires --corpus and --checkpoint");
  const auto embeddings_path = take(kv, "embeddings");
  const auto out_dir = take(kv, "out");

  auto loaded = load_checkpoint(checkpoint_path, load_embeddings(embeddings_path));
  auto cfg = loaded.config;
  if (auto t = take(kv, "threshold"); !t.empty()) cfg.threshold = to_real("threshold", t);
  if (auto a = take(kv, "averaging"); !a.empty()) {
    if (a != "micro" && a != "macro") throw std::invalid_argument("config: averaging expects micro|macro");
    cfg.averaging = a == "micro" ? Averaging::kMicro : Averaging::kMacro;
  }
  const auto corpus = parse_corpus(corpus_path);
  const auto report = evaluate(*loaded.model, corpus.documents, cfg.threshold, cfg.averaging);
  const auto json = to_json(report);
  out << json.dump() << '\n';
  err << format_table(report);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "metrics.json") << json.dump(2) << '\n';
    auto echo = to_key_values(cfg);
    echo["corpus"] = corpus_path;
    echo["checkpoint"] = checkpoint_path;
    echo["embeddings"] = embeddings_path;
    echo["out"] = out_dir;
    write_key_values(fs::path(out_dir) / "effective_config.txt", echo);
  }
  return 0;
}

int cmd_gradcheck(std::map<std::string, std::string> kv, std::ostream& out) {
  const double eps = to_real("eps", take(kv, "eps", "1e-5"));
  const double tol = to_real("tol", take(kv, "tol", "1e-4"));
  const auto clauses = to_size("clauses", take(kv, "clauses", "5"));
  if (!kv.contains("dim")) kv["dim"] = "16";
  if (!kv.contains("hidden")) kv["hidden"] = "16";
  if (!kv.contains("seed")) kv["seed"] = "0";
  kv["dropout"] = "0";
  auto cfg = train_config_from(kv);
  if (cfg.model.embedding != EmbeddingMode::kLookup) throw std::invalid_argument("gradcheck uses lookup embeddings");

  SynthConfig synth;
  synth.num_docs = 1;
  synth.clauses_per_doc = {clauses, clauses};
  synth.tokens_per_clause = {2, 4};
  synth.vocab_size = 24;
  synth.pair_distance = {0, std::min<std::size_t>(1, clauses - 1)};
  synth.pairs_per_doc = {1, 1};
  const auto corpus = generate_synthetic(synth, cfg.seed);
  A2Net model(cfg.model, corpus.vocabulary, cfg.seed);
  const auto report = grad_check_model(model, corpus.documents.front(), cfg, eps, tol);

  nlohmann::ordered_json j;
  j["passed"] = report.passed;
  j["max_rel_error"] = report.max_rel_error;
  j["tolerance"] = tol;
  j["parameters"] = report.params.size();
  auto worst = std::max_element(report.params.begin(), report.params.end(),
                                [](const auto& a, const auto& b) { return a.max_rel_error < b.max_rel_error; });
  if (worst != report.params.end()) j["worst_parameter"] = worst->name;
  if (!report.failure.empty()) j["non_finite_parameter"] = report.failure;
  out << j.dump() << '\n';
  return report.passed ? 0 : 1;
}

int cmd_folds(std::map<std::string, std::string> kv, std::ostream& out) {
  const auto corpus_path = take(kv, "corpus");
  if (corpus_path.empty()) throw UsageError("folds requires --corpus");
  const auto k = to_size("folds", take(kv, "folds", "10"));
  const auto seed = to_size("seed", take(kv, "seed", "0"));
  const auto path = take(kv, "out");
  const auto corpus = parse_corpus(corpus_path);
  const auto folds = split_folds(corpus.documents.size(), k, seed);

  nlohmann::ordered_json j;
  j["corpus"] = corpus_path;
  j["k"] = k;
  j["seed"] = seed;
  j["folds"] = nlohmann::ordered_json::array();
  auto ids = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::uint64_t> v;
    for (auto i : idx) v.push_back(corpus.documents[i].doc_id);
    return v;
  };
  for (std::size_t f = 0; f < folds.size(); ++f) {
    nlohmann::ordered_json fj;
    fj["fold"] = f;
    fj["train"] = ids(folds[f].train);
    fj["test"] = ids(folds[f].test);
    j["folds"].push_back(fj);
  }
  if (path.empty()) {
    out << j.dump() << '\n';
  } else {
    std::ofstream(path) << j.dump() << '\n';
    write_key_values(path + ".config", {{"corpus", corpus_path},
                                        {"folds", std::to_string(k)},
                                        {"seed", std::to_string(seed)},
                                        {"out", path}});
    out << "wrote " << folds.size() << " folds to " << path << '\n';
  }
  return 0;
}

void print_error(std::ostream& err, const char* kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> synth_key_values(const SynthConfig& cfg) {
  return {
      {"num-docs", std::to_string(cfg.num_docs)},
      {"min-clauses", std::to_string(cfg.clauses_per_doc.min)},
      {"max-clauses", std::to_string(cfg.clauses_per_doc.max)},
      {"min-tokens", std::to_string(cfg.tokens_per_clause.min)},
      {"max-tokens", std::to_string(cfg.tokens_per_clause.max)},
      {"vocab-size", std::to_string(cfg.vocab_size)},
      {"min-distance", std::to_string(cfg.pair_distance.min)},
      {"max-distance", std::to_string(cfg.pair_distance.max)},
      {"min-pairs", std::to_string(cfg.pairs_per_doc.min)},
      {"max-pairs", std::to_string(cfg.pairs_per_doc.max)},
      {"trigger-types", std::to_string(cfg.trigger_types)},
  };
}

std::vector<std::string> apply_synth_key_values(SynthConfig& cfg, const std::map<std::string, std::string>& kv) {
  std::vector<std::string> unknown;
  for (const auto& [k, v] : kv) {
    if (k == "num-docs") cfg.num_docs = to_size(k, v);
    else if (k == "min-clauses") cfg.clauses_per_doc.min = to_size(k, v);
    else if (k == "max-clauses") cfg.clauses_per_doc.max = to_size(k, v);
    else if (k == "min-tokens") cfg.tokens_per_clause.min = to_size(k, v);
    else if (k == "max-tokens") cfg.tokens_per_clause.max = to_size(k, v);
    else if (k == "vocab-size") cfg.vocab_size = to_size(k, v);
    else if (k == "min-distance") cfg.pair_distance.min = to_size(k, v);
    else if (k == "max-distance") cfg.pair_distance.max = to_size(k, v);
    else if (k == "min-pairs") cfg.pairs_per_doc.min = to_size(k, v);
    else if (k == "max-pairs") cfg.pairs_per_doc.max = to_size(k, v);
    else if (k == "trigger-types") cfg.trigger_types = to_size(k, v);
    else unknown.push_back(k);
  }
  return unknown;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emotion-cause pair extraction: training and evaluation engine", "a2net"};
  app.require_subcommand(1);

  std::map<std::string, Command> commands;
  auto add = [&](const std::string& name, const std::string& description) -> Command& {
    auto& c = commands[name];
    c.app = app.add_subcommand(name, description);
    c.app->add_option("--config", c.config_path, "key=value config file (flags override it)");
    return c;
  };

  const auto tkeys = train_keys();
  auto& synth = add("synth", "generate a synthetic JSONL corpus");
  synth.bind(synth_keys());
  synth.bind({"seed", "out"});

  auto& train = add("train", "train a model and write checkpoint + per-epoch log");
  train.bind({"corpus", "dev-corpus", "embeddings", "out", "checkpoint"});
  train.bind(tkeys);

  auto& eval = add("eval", "evaluate a checkpoint on a corpus and print metrics JSON");
  eval.bind({"corpus", "checkpoint", "embeddings", "out", "threshold", "averaging"});

  auto& gradcheck = add("gradcheck", "finite-difference check of the full model on a random document");
  gradcheck.bind({"eps", "tol", "clauses"});
  gradcheck.bind(tkeys);

  auto& folds = add("folds", "write a k-fold cross-validation manifest");
  folds.bind({"corpus", "folds", "seed", "out"});

  std::set<std::string> known;
  for (const auto& [name, c] : commands) known.insert(c.keys.begin(), c.keys.end());

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return 2;
  }

  try {
    for (auto& [name, c] : commands) {
      if (!c.app->parsed()) continue;
      auto kv = c.merged(known);
      if (name == "synth") return cmd_synth(std::move(kv), out);
      if (name == "train") return cmd_train(std::move(kv), out);
      if (name == "eval") return cmd_eval(std::move(kv), out, err);
      if (name == "gradcheck") return cmd_gradcheck(std::move(kv), out);
      if (name == "folds") return cmd_folds(std::move(kv), out);
    }
  } catch (const UsageError& e) {
    print_error(err, "usage", e.what());
    err << app.help();
    return 2;
  } catch (const DataError& e) {
    print_error(err, "data", e.what());
    return 1;
  } catch (const TrainingError& e) {
    print_error(err, "training", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "validation", e.what());
    return 1;
  }
  return 2;
}

}  // namespace a2net
