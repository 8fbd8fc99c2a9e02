#pragma once

#include <set>

#include "a2net/data.hpp"
#include "a2net/layers.hpp"
#include "a2net/pfn.hpp"

namespace a2net {

struct TaskRepresentations {
  Var emotion;  // (N, 2*hidden) = [H_e ; H_s]
  Var cause;    // (N, 2*hidden) = [H_c ; H_s]
};

TaskRepresentations task_representations(const SequenceFeatures& features);

// r_ij = [H_e[i] + H_s[i] ; H_c[j] + H_s[j] ; e_ij], shape (1, 2*hidden + dim_pos).
Var pair_representation(std::size_t i, std::size_t j, const SequenceFeatures& features,
                        Var position);
// All ordered pairs at once; row i*N + j equals pair_representation(i, j, ...).
// `position_grid` is (N*N, dim_pos) in the same order.
Var pair_grid_representation(const SequenceFeatures& features, Var position_grid);

// Plain score values pulled off a forward pass.
struct ScoreMatrices {
  std::vector<double> emotion;  // (N)
  std::vector<double> cause;    // (N)
  Tensor pair;                  // (N, N), row = emotion clause, column = cause clause

  std::size_t size() const { return emotion.size(); }
};

enum class ClauseHead { kEmotion, kCause };

class PredictionHeads {
 public:
  // Clause heads read 2*hidden, the pair head 2*hidden + dim_pos; each FFN has
  // `ffn_hidden` tanh units.
  static PredictionHeads create(ParameterStore& store, std::size_t hidden, std::size_t dim_pos,
                                std::size_t ffn_hidden, Rng& rng);

  // (N, 2*hidden) -> (N) scores in (0, 1)
  Var predict_clause(Graph& g, Var representations, ClauseHead head) const;
  // (N*N, width) -> (N, N) scores in (0, 1)
  Var predict_pair(Graph& g, Var pair_grid, std::size_t n) const;

  const Ffn& emotion() const { return emotion_; }
  const Ffn& cause() const { return cause_; }
  const Ffn& pair() const { return pair_; }

 private:
  Ffn emotion_;
  Ffn cause_;
  Ffn pair_;
};

enum class LossForm {
  kBinaryCrossEntropy,  // -sum [y log p + (1-y) log(1-p)]
  kLiteral,             // -sum y log p
};

Tensor clause_indicator(const std::set<std::size_t>& labels, std::size_t n);
Tensor pair_indicator(const std::set<ClausePair>& labels, std::size_t n);

// Scores are clamped to [1e-12, 1 - 1e-12] inside the logs.
Var binary_loss(Graph& g, Var scores, const Tensor& gold, LossForm form);
Var aux_loss(Graph& g, Var emotion_scores, Var cause_scores, const Tensor& gold_emotion,
             const Tensor& gold_cause, LossForm form);
Var pair_loss(Graph& g, Var pair_scores, const Tensor& gold_pairs, LossForm form);

}  // namespace a2net
