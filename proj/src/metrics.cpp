#include "a2net/metrics.hpp"

#include <cstdio>

namespace a2net {

Predictions decode(const ScoreMatrices& scores, double tau) {
  Predictions p;
  const auto n = scores.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (scores.emotion[i] > tau) p.emotions.insert(i);
    if (scores.cause[i] > tau) p.causes.insert(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (scores.pair.values[i * n + j] > tau) p.pairs.emplace(i, j);
    }
  }
  return p;
}

Counts& Counts::operator+=(const Counts& o) {
  true_positive += o.true_positive;
  false_positive += o.false_positive;
  false_negative += o.false_negative;
  return *this;
}

Prf Counts::prf() const {
  const auto predicted = true_positive + false_positive;
  const auto gold = true_positive + false_negative;
  if (predicted == 0 && gold == 0) return {1.0, 1.0, 1.0};
  Prf r;
  r.precision = predicted ? static_cast<double>(true_positive) / static_cast<double>(predicted) : 0.0;
  r.recall = gold ? static_cast<double>(true_positive) / static_cast<double>(gold) : 0.0;
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

ConsistencyCounts& ConsistencyCounts::operator+=(const ConsistencyCounts& o) {
  emotion_agree += o.emotion_agree;
  emotion_total += o.emotion_total;
  cause_agree += o.cause_agree;
  cause_total += o.cause_total;
  return *this;
}

double ConsistencyCounts::emotion_rate() const {
  return emotion_total ? static_cast<double>(emotion_agree) / static_cast<double>(emotion_total) : 1.0;
}

double ConsistencyCounts::cause_rate() const {
  return cause_total ? static_cast<double>(cause_agree) / static_cast<double>(cause_total) : 1.0;
}

ConsistencyCounts consistency_counts(const Predictions& pred) {
  std::set<std::size_t> pair_emotions, pair_causes;
  for (const auto& [e, c] : pred.pairs) {
    pair_emotions.insert(e);
    pair_causes.insert(c);
  }
  ConsistencyCounts out;
  out.emotion_total = pair_emotions.size();
  out.cause_total = pair_causes.size();
  for (auto e : pair_emotions) out.emotion_agree += pred.emotions.contains(e) ? 1 : 0;
  for (auto c : pair_causes) out.cause_agree += pred.causes.contains(c) ? 1 : 0;
  return out;
}

std::pair<double, double> consistency_rates(const Predictions& pred) {
  const auto c = consistency_counts(pred);
  return {c.emotion_rate(), c.cause_rate()};
}

void MetricsAccumulator::add(const Predictions& pred, const Document& gold) {
  const auto ee = count_matches(pred.emotions, gold.emotions);
  const auto ce = count_matches(pred.causes, gold.causes);
  const auto ecpe = count_matches(pred.pairs, gold.pairs);
  ee_ += ee;
  ce_ += ce;
  ecpe_ += ecpe;
  auto accumulate = [](Prf& sum, const Prf& x) {
    sum.precision += x.precision;
    sum.recall += x.recall;
    sum.f1 += x.f1;
  };
  accumulate(ee_sum_, ee.prf());
  accumulate(ce_sum_, ce.prf());
  accumulate(ecpe_sum_, ecpe.prf());
  consistency_ += consistency_counts(pred);
  ++docs_;
}

MetricsReport MetricsAccumulator::report(Averaging averaging) const {
  MetricsReport r;
  if (averaging == Averaging::kMicro || docs_ == 0) {
    r.ee = ee_.prf();
    r.ce = ce_.prf();
    r.ecpe = ecpe_.prf();
  } else {
    const double n = static_cast<double>(docs_);
    auto mean = [n](const Prf& s) { return Prf{s.precision / n, s.recall / n, s.f1 / n}; };
    r.ee = mean(ee_sum_);
    r.ce = mean(ce_sum_);
    r.ecpe = mean(ecpe_sum_);
  }
  r.consistency_emotion = consistency_.emotion_rate();
  r.consistency_cause = consistency_.cause_rate();
  return r;
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  auto prf = [](const Prf& p) {
    nlohmann::ordered_json j;
    j["p"] = p.precision;
    j["r"] = p.recall;
    j["f1"] = p.f1;
    return j;
  };
  nlohmann::ordered_json j;
  j["ee"] = prf(report.ee);
  j["ce"] = prf(report.ce);
  j["ecpe"] = prf(report.ecpe);
  j["consistency_e"] = report.consistency_emotion;
  j["consistency_c"] = report.consistency_cause;
  return j;
}

std::string format_table(const MetricsReport& report) {
  std::string out = "task        P        R       F1\n";
  char line[96];
  auto row = [&](const char* name, const Prf& p) {
    std::snprintf(line, sizeof line, "%-6s %8.2f %8.2f %8.2f\n", name, 100.0 * p.precision, 100.0 * p.recall,
                  100.0 * p.f1);
    out += line;
  };
  row("ECPE", report.ecpe);
  row("EE", report.ee);
  row("CE", report.ce);
  std::snprintf(line, sizeof line, "consistency  emotion %.2f  cause %.2f\n", 100.0 * report.consistency_emotion,
                100.0 * report.consistency_cause);
  out += line;
  return out;
}

}  // namespace a2net
