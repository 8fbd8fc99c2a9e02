// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Pass criterion names as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "a2net/cli.hpp"
#include "a2net/ita.hpp"
#include "a2net/metrics.hpp"
#include "a2net/pfn.hpp"
#include "a2net/train.hpp"

namespace {

using namespace a2net;
using Clock = std::chrono::steady_clock;

// Mean test ECPE F1 over five seeds must reach this. Pilot (dim 32, hidden 32,
// lr 0.005, 15 epochs, seeds 1..5) reached 0.97 to 1.00 per seed; the bar sits
// below that spread.
constexpr double kGeneralizationThreshold = 0.90;
constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

struct Outcome {
  bool passed = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Tensor uniform(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  auto t = Tensor::zeros(std::move(shape));
  for (auto& v : t.values) v = u(rng);
  return t;
}

Outcome gradient_correctness() {
  struct Mode {
    std::string name;
    std::function<void(TrainConfig&)> apply;
  };
  std::vector<Mode> modes;
  for (auto enc : {Encoding::kPfn, Encoding::kShared, Encoding::kParallel}) {
    for (auto ita : {ItaMode::kBoth, ItaMode::kP2E, ItaMode::kE2P, ItaMode::kOff}) {
      modes.push_back({std::string(to_string(enc)) + "/" + std::string(to_string(ita)), [=](TrainConfig& c) {
                         c.model.encoding = enc;
                         c.ita = ita;
                       }});
    }
  }
  modes.push_back({"aux-off", [](TrainConfig& c) { c.aux = false; }});
  modes.push_back({"literal-loss", [](TrainConfig& c) { c.literal_loss = true; }});
  modes.push_back({"shared-gates", [](TrainConfig& c) { c.model.share_gate_params = true; }});

  SynthConfig synth;
  synth.num_docs = 1;
  synth.clauses_per_doc = {5, 5};
  synth.tokens_per_clause = {2, 4};
  synth.vocab_size = 24;
  synth.pair_distance = {0, 1};
  const auto corpus = generate_synthetic(synth, 0);

  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_mode, failed;
  for (const auto& m : modes) {
    TrainConfig cfg;
    cfg.model.dim = 16;
    cfg.model.hidden = 16;
    cfg.dropout = 0.0;
    m.apply(cfg);
    A2Net model(cfg.model, corpus.vocabulary, 0);
    const auto r = grad_check_model(model, corpus.documents.front(), cfg, 1e-5, 1e-4);
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_mode = m.name;
    }
    if (!r.passed) failed += " " + m.name;
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.passed = failed.empty() && worst <= 1e-4 && elapsed < 60.0;
  o.detail = fmt("%zu modes, max rel error %.2e (%s), %.1f s", modes.size(), worst, worst_mode.c_str(), elapsed);
  if (!failed.empty()) o.detail += "; failed:" + failed;
  return o;
}

Outcome pfn_invariants() {
  std::mt19937_64 rng(2024);
  const std::size_t hidden = 8, input = 5;
  std::size_t checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    ParameterStore store;
    const auto cell = PfnCell::create(store, "pfn", input, hidden, false, rng);
    for (auto* p : store.all()) {
      if (p->name.find("gate") != std::string::npos) p->value = uniform(p->value.shape, rng, -3, 3);
    }
    Graph g;
    const auto x = g.constant(uniform({1, input}, rng, -2, 2));
    const auto h = g.constant(uniform({1, hidden}, rng, -1, 1));
    const auto c = g.constant(uniform({1, hidden}, rng, -2, 2));
    for (auto family : {GateFamily::kForget, GateFamily::kInput}) {
      const auto gates = cell.compute_gates(g, x, h, family);
      const auto ge = gates.emotion.value().values;
      const auto gc = gates.cause.value().values;
      const auto parts = PfnCell::partition(gates.emotion, gates.cause);
      const auto fe = parts.emotion.value().values;
      const auto fc = parts.cause.value().values;
      const auto fs = parts.shared.value().values;
      for (std::size_t k = 0; k < hidden; ++k) {
        if (k > 0 && (ge[k] < ge[k - 1] || gc[k] > gc[k - 1])) return {false, fmt("monotonicity, trial %d", trial)};
        if (fe[k] < 0 || fc[k] < 0 || fs[k] < 0) return {false, fmt("negative partition, trial %d", trial)};
        if (std::abs(fe[k] + fc[k] + fs[k] - (ge[k] + gc[k] - ge[k] * gc[k])) > 1e-12) {
          return {false, fmt("partition sum, trial %d", trial)};
        }
        ++checks;
      }
      if (std::abs(ge.back() - 1.0) > 1e-12 || std::abs(gc.back()) > 1e-12) {
        return {false, fmt("gate endpoint, trial %d", trial)};
      }
    }
    const auto out = cell.step(g, x, h, c);
    for (auto v : {out.h_emotion, out.h_cause, out.h_shared, out.h_next}) {
      for (double y : v.value().values) {
        if (!(y > -1.0 && y < 1.0)) return {false, fmt("hidden output %g outside (-1,1), trial %d", y, trial)};
      }
    }
  }
  return {true, fmt("1000 steps, %zu gate cells checked", checks)};
}

double kl(const Tensor& p, const Tensor& q, ItaMode mode) {
  Graph g;
  return kl_loss(g.constant(p), g.constant(q), mode).item();
}

Outcome ita_identities() {
  std::mt19937_64 rng(7);
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  double self = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto x = uniform({6, 6}, rng, 0, 1);
    for (auto mode : {ItaMode::kBoth, ItaMode::kP2E, ItaMode::kE2P}) self = std::max(self, std::abs(kl(x, x, mode)));
  }
  check(self <= 1e-10, fmt("kl(x,x) = %g", self));

  double min_both = INFINITY, asym = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + t % 10;
    const auto p = uniform({n, n}, rng, 0, 1);
    const auto q = uniform({n, n}, rng, 0, 1);
    const double pq = kl(p, q, ItaMode::kBoth);
    min_both = std::min(min_both, pq);
    asym = std::max(asym, std::abs(pq - kl(q, p, ItaMode::kBoth)));
  }
  check(min_both >= 0.0, fmt("min both-mode loss %g", min_both));
  check(asym <= 1e-12, fmt("asymmetry %g", asym));

  double row_err = 0.0, bound_excess = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 8;
    Graph g;
    const auto alpha_var = mask_from_vectors(g.constant(uniform({n, 4}, rng, -3, 3)), g.constant(uniform({n, 4}, rng, -3, 3)));
    const auto alpha = alpha_var.value();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += alpha.at(i, j);
      row_err = std::max(row_err, std::abs(s - 1.0));
    }
    auto ye = uniform({n}, rng, 0, 1);
    const auto yc = uniform({n}, rng, 0, 1);
    if (t % 5 == 0) ye[0] = 0.0;
    const auto y = pseudo_pair_scores(g.constant(ye), g.constant(yc), alpha_var).value();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) bound_excess = std::max(bound_excess, y.at(i, j) - std::sqrt(ye[i] * yc[j]));
    }
  }
  check(row_err <= 1e-9, fmt("alpha row error %g", row_err));
  check(bound_excess <= 0.0, fmt("pseudo score exceeds bound by %g", bound_excess));

  Graph g;
  const auto pseudo = pseudo_pair_scores(g.constant(Tensor({2}, {0.64, 1.0})), g.constant(Tensor({2}, {0.25, 1.0})),
                                         g.constant(Tensor({2, 2}, {0.5, 0.5, 0.0, 1.0})))
                          .value()
                          .at(0, 0);
  check(std::abs(pseudo - 0.2) <= 1e-5, fmt("pseudo example %g", pseudo));
  const double cell = kl(Tensor({1}, {0.8}), Tensor({1}, {0.2}), ItaMode::kBoth);
  check(std::abs(cell - 0.41589) <= 1e-5, fmt("kl example %g", cell));

  if (!failures.empty()) {
    std::string d;
    for (const auto& f : failures) d += f + "; ";
    return {false, d};
  }
  return {true, fmt("self %.1e, min both %.3g, asym %.1e, rows %.1e, pseudo %.6f, kl %.6f", self, min_both, asym,
                    row_err, pseudo, cell)};
}

TrainConfig desk_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.model.dim = 32;
  cfg.model.hidden = 32;
  cfg.learning_rate = 0.005;
  cfg.epochs = 15;
  cfg.seed = seed;
  return cfg;
}

Outcome memorization() {
  SynthConfig synth;
  synth.num_docs = 32;
  const auto corpus = generate_synthetic(synth, 11);
  auto cfg = desk_config(11);
  cfg.epochs = 200;
  cfg.dropout = 0.0;
  cfg.stop_at_dev_f1 = 1.0;
  cfg.workers = 1;
  const auto t0 = Clock::now();
  const auto r = fit(corpus.documents, corpus.documents, cfg);
  const double elapsed = seconds_since(t0);
  const double f1 = evaluate(*r.model, corpus.documents, cfg.threshold).ecpe.f1;
  return {f1 == 1.0 && elapsed < 300.0,
          fmt("train pair F1 %.4f after %zu epochs, %.1f s", f1, r.log.size(), elapsed)};
}

struct SplitData {
  std::vector<Document> train, test;
};

SplitData synthetic_split(std::uint64_t seed) {
  const auto corpus = generate_synthetic(SynthConfig{}, seed);
  SplitData s;
  s.train.assign(corpus.documents.begin(), corpus.documents.begin() + 500);
  s.test.assign(corpus.documents.begin() + 500, corpus.documents.begin() + 600);
  return s;
}

// Mean test ECPE F1 over the five seeds for one ITA mode; no dev set, so the
// last-epoch parameters are scored.
double mean_test_f1(ItaMode mode, std::vector<double>* per_seed = nullptr) {
  double sum = 0.0;
  for (auto seed : kSeeds) {
    const auto data = synthetic_split(seed);
    auto cfg = desk_config(seed);
    cfg.ita = mode;
    const auto r = fit(data.train, {}, cfg);
    const double f1 = evaluate(*r.model, data.test, cfg.threshold).ecpe.f1;
    if (per_seed) per_seed->push_back(f1);
    sum += f1;
  }
  return sum / std::size(kSeeds);
}

double full_model_f1 = -1.0;

double full_model(std::vector<double>* per_seed = nullptr) {
  if (full_model_f1 < 0.0 || per_seed) full_model_f1 = mean_test_f1(ItaMode::kBoth, per_seed);
  return full_model_f1;
}

Outcome generalization() {
  std::vector<double> per_seed;
  const double mean = full_model(&per_seed);
  std::string seeds;
  for (double f : per_seed) seeds += fmt(" %.3f", f);
  return {mean >= kGeneralizationThreshold,
          fmt("mean test ECPE F1 %.4f (threshold %.2f); seeds:%s", mean, kGeneralizationThreshold, seeds.c_str())};
}

Outcome ablation() {
  const double both = full_model();
  const double p2e = mean_test_f1(ItaMode::kP2E);
  const double e2p = mean_test_f1(ItaMode::kE2P);
  const double off = mean_test_f1(ItaMode::kOff);
  const bool ok = both >= p2e && both >= e2p && p2e >= off - 0.01 && e2p >= off - 0.01;
  const double spread = std::max({both, p2e, e2p, off}) - std::min({both, p2e, e2p, off});
  return {ok, fmt("both %.4f, p2e %.4f, e2p %.4f, off %.4f; spread %.4f", both, p2e, e2p, off, spread)};
}

Outcome consistency() {
  Predictions pred;
  pred.pairs = {{6, 5}};
  const double without = consistency_rates(pred).first;
  pred.emotions = {6};
  const double with = consistency_rates(pred).first;
  return {without == 0.0 && with == 1.0, fmt("emotions {} -> %.1f, emotions {6} -> %.1f", without, with)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / fmt("a2net_acceptance_%d", static_cast<int>(::getpid()));
  std::filesystem::create_directories(root);
  const auto corpus = (root / "corpus.jsonl").string();
  const auto dev = (root / "dev.jsonl").string();
  std::ostringstream sink;
  run_cli({"synth", "--num-docs", "40", "--seed", "9", "--out", corpus}, sink, sink);
  run_cli({"synth", "--num-docs", "20", "--seed", "10", "--out", dev}, sink, sink);

  std::vector<std::string> logs, metrics;
  for (int rep = 0; rep < 2; ++rep) {
    const auto out = (root / fmt("run%d", rep)).string();
    std::ostringstream o, e;
    const int t = run_cli({"train", "--corpus", corpus, "--dev-corpus", dev, "--out", out, "--epochs", "4", "--dim",
                           "16", "--hidden", "16", "--seed", "5", "--workers", "2"},
                          o, e);
    std::ostringstream mo, me;
    const int v = run_cli({"eval", "--corpus", dev, "--checkpoint", out + "/checkpoint.a2ck"}, mo, me);
    if (t != 0 || v != 0) {
      std::filesystem::remove_all(root);
      return {false, "cli run failed: " + e.str() + me.str()};
    }
    logs.push_back(slurp(out + "/train_log.jsonl"));
    metrics.push_back(mo.str());
  }
  std::filesystem::remove_all(root);
  const bool ok = !logs[0].empty() && logs[0] == logs[1] && metrics[0] == metrics[1];
  return {ok, fmt("train logs %s (%zu bytes), eval metrics %s", logs[0] == logs[1] ? "identical" : "differ",
                  logs[0].size(), metrics[0] == metrics[1] ? "identical" : "differ")};
}

Outcome loss_decomposition() {
  SynthConfig synth;
  synth.num_docs = 10;
  const auto corpus = generate_synthetic(synth, 21);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  double zero_err = 0.0, sum_err = 0.0;
  for (int t = 0; t < 6; ++t) {
    auto cfg = desk_config(static_cast<std::uint64_t>(t));
    cfg.model.dim = 12;
    cfg.model.hidden = 10;
    cfg.lambda1 = t == 0 ? 0.0 : u(rng);
    cfg.lambda2 = t == 0 ? 0.0 : u(rng);
    cfg.epochs = 1;
    const auto r = fit(corpus.documents, {}, cfg);
    auto check = [&](const LossValues& v) {
      if (t == 0) zero_err = std::max(zero_err, std::abs(v.total - v.pair));
      sum_err = std::max(sum_err, std::abs(v.total - (v.pair + cfg.lambda1 * v.aux + cfg.lambda2 * v.kl)));
    };
    for (const auto& doc : corpus.documents) {
      Graph g;
      const auto pass = r.model->forward(g, doc, cfg.forward_options(false));
      check(loss_values(pass.losses, total_loss(pass.losses, cfg)));
    }
    check(r.log.back().mean_loss);
  }
  return {zero_err <= 1e-12 && sum_err <= 1e-12,
          fmt("|total - pair| at zero weights %.1e, |total - weighted sum| %.1e", zero_err, sum_err)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient-correctness", gradient_correctness},
      {"pfn-gate-invariants", pfn_invariants},
      {"ita-identities", ita_identities},
      {"memorization", memorization},
      {"generalization", generalization},
      {"ablation-direction", ablation},
      {"consistency-metric", consistency},
      {"determinism", determinism},
      {"loss-decomposition", loss_decomposition},
  };
  const std::vector<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
