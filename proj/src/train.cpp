#include "a2net/train.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace a2net {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw std::invalid_argument("config: " + key + " expects a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw std::invalid_argument("config: " + key + " expects a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool parse_switch(const std::string& key, const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw std::invalid_argument("config: " + key + " expects on|off, got '" + s + "'");
}

const char* on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

ForwardOptions TrainConfig::forward_options(bool training) const {
  ForwardOptions o;
  o.dropout = training ? dropout : 0.0;
  o.ita = ita;
  o.detach = detach;
  o.loss_form = literal_loss ? LossForm::kLiteral : LossForm::kBinaryCrossEntropy;
  return o;
}

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (!(cfg.lambda1 >= 0.0)) fail("lambda1 must be >= 0");
  if (!(cfg.lambda2 >= 0.0)) fail("lambda2 must be >= 0");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (!(cfg.learning_rate > 0.0)) fail("lr must be > 0");
  if (cfg.batch_size == 0) fail("batch must be >= 1");
  if (cfg.workers == 0) fail("workers must be >= 1");
  if (!(cfg.threshold >= 0.0 && cfg.threshold < 1.0)) fail("threshold must be in [0, 1)");
  if (!(cfg.weight_decay >= 0.0)) fail("weight-decay must be >= 0");
  if (cfg.model.hidden == 0 || cfg.model.dim == 0) fail("hidden and dim must be positive");
}

std::map<std::string, std::string> to_key_values(const TrainConfig& cfg) {
  std::map<std::string, std::string> kv;
  const auto& m = cfg.model;
  kv["embedding-mode"] = m.embedding == EmbeddingMode::kLookup ? "lookup" : "precomputed";
  kv["dim"] = std::to_string(m.dim);
  kv["hidden"] = std::to_string(m.hidden);
  kv["dim-pos"] = std::to_string(m.dim_pos);
  kv["max-offset"] = std::to_string(m.max_offset);
  kv["mask-dim"] = std::to_string(m.mask_dim);
  kv["ffn-hidden"] = std::to_string(m.ffn_hidden);
  kv["encoding"] = std::string(to_string(m.encoding));
  kv["share-gate-params"] = on_off(m.share_gate_params);
  kv["lambda1"] = format_double(cfg.lambda1);
  kv["lambda2"] = format_double(cfg.lambda2);
  kv["lr"] = format_double(cfg.learning_rate);
  kv["batch"] = std::to_string(cfg.batch_size);
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["dropout"] = format_double(cfg.dropout);
  kv["seed"] = std::to_string(cfg.seed);
  kv["weight-decay"] = format_double(cfg.weight_decay);
  kv["beta1"] = format_double(cfg.beta1);
  kv["beta2"] = format_double(cfg.beta2);
  kv["adam-eps"] = format_double(cfg.adam_epsilon);
  kv["threshold"] = format_double(cfg.threshold);
  kv["ita"] = std::string(to_string(cfg.ita));
  kv["aux"] = on_off(cfg.aux);
  kv["literal-loss"] = on_off(cfg.literal_loss);
  kv["detach-side"] = std::string(to_string(cfg.detach));
  kv["averaging"] = cfg.averaging == Averaging::kMicro ? "micro" : "macro";
  kv["workers"] = std::to_string(cfg.workers);
  kv["stop-at-dev-f1"] = cfg.stop_at_dev_f1 ? format_double(*cfg.stop_at_dev_f1) : "";
  return kv;
}

std::vector<std::string> apply_key_values(TrainConfig& cfg, const std::map<std::string, std::string>& kv) {
  std::vector<std::string> unknown;
  auto& m = cfg.model;
  for (const auto& [k, v] : kv) {
    if (k == "embedding-mode") {
      if (v == "lookup") m.embedding = EmbeddingMode::kLookup;
      else if (v == "precomputed") m.embedding = EmbeddingMode::kPrecomputed;
      else throw std::invalid_argument("config: embedding-mode expects lookup|precomputed");
    } else if (k == "dim") m.dim = parse_uint(k, v);
    else if (k == "hidden") m.hidden = parse_uint(k, v);
    else if (k == "dim-pos") m.dim_pos = parse_uint(k, v);
    else if (k == "max-offset") m.max_offset = parse_uint(k, v);
    else if (k == "mask-dim") m.mask_dim = parse_uint(k, v);
    else if (k == "ffn-hidden") m.ffn_hidden = parse_uint(k, v);
    else if (k == "encoding") m.encoding = parse_encoding(v);
    else if (k == "share-gate-params") m.share_gate_params = parse_switch(k, v);
    else if (k == "lambda1") cfg.lambda1 = parse_double(k, v);
    else if (k == "lambda2") cfg.lambda2 = parse_double(k, v);
    else if (k == "lr") cfg.learning_rate = parse_double(k, v);
    else if (k == "batch") cfg.batch_size = parse_uint(k, v);
    else if (k == "epochs") cfg.epochs = parse_uint(k, v);
    else if (k == "dropout") cfg.dropout = parse_double(k, v);
    else if (k == "seed") cfg.seed = parse_uint(k, v);
    else if (k == "weight-decay") cfg.weight_decay = parse_double(k, v);
    else if (k == "beta1") cfg.beta1 = parse_double(k, v);
    else if (k == "beta2") cfg.beta2 = parse_double(k, v);
    else if (k == "adam-eps") cfg.adam_epsilon = parse_double(k, v);
    else if (k == "threshold") cfg.threshold = parse_double(k, v);
    else if (k == "ita") cfg.ita = parse_ita_mode(v);
    else if (k == "aux") cfg.aux = parse_switch(k, v);
    else if (k == "literal-loss") cfg.literal_loss = parse_switch(k, v);
    else if (k == "detach-side") cfg.detach = parse_detach_side(v);
    else if (k == "averaging") {
      if (v == "micro") cfg.averaging = Averaging::kMicro;
      else if (v == "macro") cfg.averaging = Averaging::kMacro;
      else throw std::invalid_argument("config: averaging expects micro|macro");
    } else if (k == "workers") cfg.workers = parse_uint(k, v);
    else if (k == "stop-at-dev-f1") {
      if (v.empty()) cfg.stop_at_dev_f1.reset();
      else cfg.stop_at_dev_f1 = parse_double(k, v);
    } else unknown.push_back(k);
  }
  return unknown;
}

Var total_loss(const LossTerms& terms, const TrainConfig& cfg) {
  Var total = terms.pair;
  if (cfg.aux) total = ops::add(total, ops::scale(terms.aux, cfg.lambda1));
  if (cfg.ita != ItaMode::kOff && terms.kl.valid()) total = ops::add(total, ops::scale(terms.kl, cfg.lambda2));
  return total;
}

LossValues loss_values(const LossTerms& terms, Var total) {
  LossValues v;
  v.pair = terms.pair.item();
  v.aux = terms.aux.valid() ? terms.aux.item() : 0.0;
  v.kl = terms.kl.valid() ? terms.kl.item() : 0.0;
  v.total = total.item();
  return v;
}

AdamW::AdamW(std::vector<Parameter*> params, Options options)
    : params_(std::move(params)), options_(options) {
  for (auto* p : params_) {
    m_.push_back(Tensor::zeros(p->value.shape));
    v_.push_back(Tensor::zeros(p->value.shape));
  }
}

void AdamW::step() {
  for (auto* p : params_) {
    if (!p->grad.all_finite()) throw TrainingError("non-finite gradient in parameter " + p->name);
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  const double lr = options_.learning_rate;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->value.values;
    const auto& grad = params_[k]->grad.values;
    auto& m = m_[k].values;
    auto& v = v_[k].values;
    for (std::size_t i = 0; i < value.size(); ++i) {
      value[i] -= lr * options_.weight_decay * value[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * grad[i];
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

nlohmann::ordered_json to_json(const EpochLog& log) {
  nlohmann::ordered_json j;
  j["epoch"] = log.epoch;
  j["loss"] = log.mean_loss.total;
  j["pair"] = log.mean_loss.pair;
  j["aux"] = log.mean_loss.aux;
  j["kl"] = log.mean_loss.kl;
  if (log.dev) j["dev"] = to_json(*log.dev);
  return j;
}

std::unique_ptr<A2Net> build_model(const std::vector<Document>& train, const TrainConfig& cfg,
                                   std::shared_ptr<const EmbeddingStore> embeddings) {
  if (cfg.model.embedding == EmbeddingMode::kLookup) {
    return std::make_unique<A2Net>(cfg.model, Vocabulary::build(train), cfg.seed);
  }
  return std::make_unique<A2Net>(cfg.model, std::move(embeddings), cfg.seed);
}

LossValues accumulate_gradients(A2Net& model, std::span<const Document* const> docs, const TrainConfig& cfg,
                                bool training, std::uint64_t dropout_seed, std::size_t workers) {
  const auto options = cfg.forward_options(training);
  auto run_one = [&](std::size_t k, GradientBuffer* into) {
    GraphOptions go;
    go.training = training;
    go.seed = splitmix64(dropout_seed + k);
    Graph g(go);
    const auto pass = model.forward(g, *docs[k], options);
    Var total = total_loss(pass.losses, cfg);
    const auto values = loss_values(pass.losses, total);
    g.backward(total, into);
    return values;
  };

  std::vector<LossValues> per_doc(docs.size());
  workers = std::max<std::size_t>(1, std::min(workers, docs.size()));
  if (workers == 1) {
    for (std::size_t k = 0; k < docs.size(); ++k) per_doc[k] = run_one(k, nullptr);
  } else {
    std::vector<GradientBuffer> buffers(workers);
    const auto chunk = (docs.size() + workers - 1) / workers;
    const auto nw = static_cast<std::ptrdiff_t>(workers);
#pragma omp parallel for schedule(static, 1)
    for (std::ptrdiff_t w = 0; w < nw; ++w) {
      const auto begin = static_cast<std::size_t>(w) * chunk;
      const auto end = std::min(docs.size(), begin + chunk);
      for (std::size_t k = begin; k < end; ++k) per_doc[k] = run_one(k, &buffers[static_cast<std::size_t>(w)]);
    }
    // Reduction in worker order.
    auto& store = model.parameters();
    for (auto* p : store.all()) {
      for (const auto& buffer : buffers) {
        if (const auto* g = buffer.find(*p)) {
          for (std::size_t i = 0; i < g->size(); ++i) p->grad[i] += (*g)[i];
        }
      }
    }
  }

  LossValues sum;
  for (const auto& v : per_doc) {
    sum.pair += v.pair;
    sum.aux += v.aux;
    sum.kl += v.kl;
    sum.total += v.total;
  }
  return sum;
}

MetricsReport evaluate(const A2Net& model, const std::vector<Document>& docs, double threshold,
                       Averaging averaging) {
  MetricsAccumulator acc;
  for (const auto& d : docs) acc.add(decode(model.predict(d), threshold), d);
  return acc.report(averaging);
}

LossValues mean_loss(const A2Net& model, const std::vector<Document>& docs, const TrainConfig& cfg) {
  LossValues sum;
  const auto options = cfg.forward_options(false);
  for (const auto& d : docs) {
    Graph g;
    const auto pass = model.forward(g, d, options);
    const auto v = loss_values(pass.losses, total_loss(pass.losses, cfg));
    sum.pair += v.pair;
    sum.aux += v.aux;
    sum.kl += v.kl;
    sum.total += v.total;
  }
  const double n = static_cast<double>(std::max<std::size_t>(docs.size(), 1));
  return LossValues{sum.pair / n, sum.aux / n, sum.kl / n, sum.total / n};
}

CheckReport grad_check_model(A2Net& model, const Document& doc, const TrainConfig& cfg, double eps, double tol) {
  const auto options = cfg.forward_options(false);
  auto loss = [&](Graph& g) { return total_loss(model.forward(g, doc, options).losses, cfg); };
  GradCheckOptions gc;
  gc.eps = eps;
  gc.tol = tol;
  return grad_check(loss, model.parameters().all(), gc);
}

FitResult fit(const std::vector<Document>& train, const std::vector<Document>& dev, const TrainConfig& cfg,
              std::shared_ptr<const EmbeddingStore> embeddings) {
  validate(cfg);
  if (train.empty()) throw std::invalid_argument("fit: training corpus is empty");

  FitResult result;
  result.model = build_model(train, cfg, std::move(embeddings));
  auto& model = *result.model;
  auto params = model.parameters().all();
  AdamW optimizer(params, {cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon, cfg.weight_decay});
  result.initial_loss = mean_loss(model, train, cfg);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(splitmix64(cfg.seed ^ 0x5eedull));

  std::vector<Tensor> best_values;
  double best_f1 = -1.0;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossValues epoch_sum;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const Document*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(&train[order[k]]);

      model.parameters().zero_grad();
      const auto seed = splitmix64(cfg.seed * 1000003ull + step);
      const auto lv = accumulate_gradients(model, batch, cfg, true, seed, cfg.workers);
      ++step;
      if (!std::isfinite(lv.total)) {
        throw TrainingError("training diverged (non-finite loss) at epoch " + std::to_string(epoch) + " step " +
                            std::to_string(step));
      }
      optimizer.step();
      epoch_sum.pair += lv.pair;
      epoch_sum.aux += lv.aux;
      epoch_sum.kl += lv.kl;
      epoch_sum.total += lv.total;
    }

    EpochLog log;
    log.epoch = epoch;
    const double n = static_cast<double>(train.size());
    log.mean_loss = {epoch_sum.pair / n, epoch_sum.aux / n, epoch_sum.kl / n, epoch_sum.total / n};
    if (!dev.empty()) {
      log.dev = evaluate(model, dev, cfg.threshold, cfg.averaging);
      if (log.dev->ecpe.f1 > best_f1) {
        best_f1 = log.dev->ecpe.f1;
        result.best_epoch = epoch;
        best_values.clear();
        for (auto* p : params) best_values.push_back(p->value);
      }
    }
    result.log.push_back(log);
    if (cfg.stop_at_dev_f1 && log.dev && log.dev->ecpe.f1 >= *cfg.stop_at_dev_f1) break;
  }

  if (!best_values.empty()) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best_values[k];
  } else {
    result.best_epoch = result.log.size();
  }
  return result;
}

// --- checkpoint -----------------------------------------------------------

namespace {

constexpr std::array<char, 4> kCheckpointMagic{'A', '2', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.put(static_cast<char>((v >> s) & 0xff));
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int s = 0; s < 64; s += 8) out.put(static_cast<char>((v >> s) & 0xff));
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t get_bytes(std::istream& in, int n) {
  std::uint64_t v = 0;
  for (int k = 0; k < n; ++k) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw DataError("checkpoint: truncated file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * k);
  }
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes(in, 8)); }

std::string get_string(std::istream& in) {
  const auto n = get_u32(in);
  if (n > (1u << 26)) throw DataError("checkpoint: implausible string length " + std::to_string(n));
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw DataError("checkpoint: truncated string");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const A2Net& model, const TrainConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic.data(), 4);
  put_u32(out, kCheckpointVersion);

  std::string config;
  for (const auto& [k, v] : to_key_values(cfg)) config += k + "=" + v + "\n";
  put_string(out, config);

  const auto& vocab = model.embeddings().vocabulary().tokens();
  const bool lookup = model.embeddings().mode() == EmbeddingMode::kLookup;
  put_u32(out, lookup ? static_cast<std::uint32_t>(vocab.size()) : 0u);
  if (lookup) {
    for (const auto& t : vocab) put_string(out, t);
  }

  const auto params = model.parameters().all();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    put_string(out, p->name);
    put_u32(out, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : p->value.values) put_f64(out, v);
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path, std::shared_ptr<const EmbeddingStore> embeddings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kCheckpointMagic) throw DataError("checkpoint: bad magic");
  const auto version = get_u32(in);
  if (version != kCheckpointVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));

  LoadedCheckpoint loaded;
  std::map<std::string, std::string> kv;
  std::istringstream config(get_string(in));
  for (std::string line; std::getline(config, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("checkpoint: malformed config line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (const auto unknown = apply_key_values(loaded.config, kv); !unknown.empty()) {
    throw DataError("checkpoint: unknown config key " + unknown.front());
  }

  const auto vocab_size = get_u32(in);
  if (vocab_size > (1u << 26)) throw DataError("checkpoint: implausible vocabulary size");
  std::vector<std::string> tokens(vocab_size);
  for (auto& t : tokens) t = get_string(in);

  const auto& mcfg = loaded.config.model;
  if (mcfg.embedding == EmbeddingMode::kLookup) {
    loaded.model = std::make_unique<A2Net>(mcfg, Vocabulary::from_tokens(std::move(tokens)), loaded.config.seed);
  } else {
    if (!embeddings) throw DataError("checkpoint uses precomputed embeddings; pass --embeddings");
    loaded.model = std::make_unique<A2Net>(mcfg, std::move(embeddings), loaded.config.seed);
  }

  auto& store = loaded.model->parameters();
  const auto count = get_u32(in);
  if (count != store.size()) {
    throw DataError("checkpoint: " + std::to_string(count) + " parameters, model has " + std::to_string(store.size()));
  }
  std::set<std::string> seen;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name = get_string(in);
    const auto rank = get_u32(in);
    if (rank > 8) throw DataError("checkpoint: implausible rank " + std::to_string(rank) + " for " + name);
    Shape shape(rank);
    for (auto& d : shape) d = get_u32(in);
    auto* p = store.find(name);
    if (p == nullptr) throw DataError("checkpoint: unknown parameter " + name);
    if (p->value.shape != shape) {
      throw DataError("checkpoint: parameter " + name + " has shape " + shape_to_string(shape) + ", model expects " +
                      shape_to_string(p->value.shape));
    }
    if (!seen.insert(name).second) throw DataError("checkpoint: duplicate parameter " + name);
    for (double& v : p->value.values) v = get_f64(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint: trailing bytes");
  return loaded;
}

}  // namespace a2net
