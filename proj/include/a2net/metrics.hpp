#pragma once

#include <algorithm>
#include <set>
#include <string>

#include "a2net/data.hpp"
#include "a2net/heads.hpp"
#include "json.hpp"

namespace a2net {

struct Predictions {
  std::set<std::size_t> emotions;
  std::set<std::size_t> causes;
  std::set<ClausePair> pairs;
};

// Keeps every element whose score is strictly greater than tau.
Predictions decode(const ScoreMatrices& scores, double tau);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Counts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;

  Counts& operator+=(const Counts& o);
  // Both sets empty scores 1/1/1; an empty prediction against gold scores 0.
  Prf prf() const;
};

template <typename T>
Counts count_matches(const std::set<T>& predicted, const std::set<T>& gold) {
  Counts c;
  for (const auto& p : predicted) {
    if (gold.contains(p)) ++c.true_positive;
    else ++c.false_positive;
  }
  c.false_negative = gold.size() - c.true_positive;
  return c;
}

template <typename T>
Prf prf1(const std::set<T>& predicted, const std::set<T>& gold) {
  return count_matches(predicted, gold).prf();
}

struct ConsistencyCounts {
  std::size_t emotion_agree = 0;
  std::size_t emotion_total = 0;
  std::size_t cause_agree = 0;
  std::size_t cause_total = 0;

  ConsistencyCounts& operator+=(const ConsistencyCounts& o);
  double emotion_rate() const;
  double cause_rate() const;
};

// Over the distinct clauses appearing in predicted pairs.
ConsistencyCounts consistency_counts(const Predictions& pred);
// (emotion_rate, cause_rate); 1.0 when no pairs are predicted.
std::pair<double, double> consistency_rates(const Predictions& pred);

struct MetricsReport {
  Prf ee;
  Prf ce;
  Prf ecpe;
  double consistency_emotion = 1.0;
  double consistency_cause = 1.0;
};

enum class Averaging { kMicro, kMacro };

// Corpus-level scoring: micro sums TP/FP/FN over documents before computing
// P/R/F1; macro averages per-document P/R/F1. Consistency is always global.
class MetricsAccumulator {
 public:
  void add(const Predictions& pred, const Document& gold);
  MetricsReport report(Averaging averaging = Averaging::kMicro) const;
  std::size_t documents() const { return docs_; }

 private:
  Counts ee_, ce_, ecpe_;
  Prf ee_sum_, ce_sum_, ecpe_sum_;
  ConsistencyCounts consistency_;
  std::size_t docs_ = 0;
};

nlohmann::ordered_json to_json(const MetricsReport& report);
std::string format_table(const MetricsReport& report);

}  // namespace a2net
