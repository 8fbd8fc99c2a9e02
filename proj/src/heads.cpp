#include "a2net/heads.hpp"

namespace a2net {

TaskRepresentations task_representations(const SequenceFeatures& f) {
  if (f.emotion.shape().at(0) != f.shared.shape().at(0) || f.cause.shape().at(0) != f.shared.shape().at(0)) {
    throw ShapeError("task_representations: row counts differ");
  }
  return TaskRepresentations{ops::concat({f.emotion, f.shared}), ops::concat({f.cause, f.shared})};
}

Var pair_representation(std::size_t i, std::size_t j, const SequenceFeatures& f, Var position) {
  Var emotion = ops::add(ops::gather_rows(f.emotion, {i}), ops::gather_rows(f.shared, {i}));
  Var cause = ops::add(ops::gather_rows(f.cause, {j}), ops::gather_rows(f.shared, {j}));
  return ops::concat({emotion, cause, position});
}

Var pair_grid_representation(const SequenceFeatures& f, Var position_grid) {
  const std::size_t n = f.emotion.shape().at(0);
  if (position_grid.shape().at(0) != n * n) throw ShapeError("pair grid: position rows != N*N");
  Var emotion = ops::add(f.emotion, f.shared);
  Var cause = ops::add(f.cause, f.shared);
  std::vector<std::size_t> row_of_i, row_of_j;
  row_of_i.reserve(n * n);
  row_of_j.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_of_i.push_back(i);
      row_of_j.push_back(j);
    }
  }
  return ops::concat({ops::gather_rows(emotion, std::move(row_of_i)),
                      ops::gather_rows(cause, std::move(row_of_j)), position_grid});
}

PredictionHeads PredictionHeads::create(ParameterStore& store, std::size_t hidden, std::size_t dim_pos,
                                        std::size_t ffn_hidden, Rng& rng) {
  PredictionHeads h;
  h.emotion_ = Ffn::create(store, "heads/emotion", 2 * hidden, ffn_hidden, 1, rng);
  h.cause_ = Ffn::create(store, "heads/cause", 2 * hidden, ffn_hidden, 1, rng);
  h.pair_ = Ffn::create(store, "heads/pair", 2 * hidden + dim_pos, ffn_hidden, 1, rng);
  return h;
}

Var PredictionHeads::predict_clause(Graph& g, Var r, ClauseHead head) const {
  const auto& ffn = head == ClauseHead::kEmotion ? emotion_ : cause_;
  const auto n = r.shape().at(0);
  return ops::reshape(ops::sigmoid(ffn(g, r)), {n});
}

Var PredictionHeads::predict_pair(Graph& g, Var grid, std::size_t n) const {
  return ops::reshape(ops::sigmoid(pair_(g, grid)), {n, n});
}

Tensor clause_indicator(const std::set<std::size_t>& labels, std::size_t n) {
  Tensor t = Tensor::zeros({n});
  for (auto i : labels) t.values.at(i) = 1.0;
  return t;
}

Tensor pair_indicator(const std::set<ClausePair>& labels, std::size_t n) {
  Tensor t = Tensor::zeros({n, n});
  for (const auto& [e, c] : labels) t.values.at(e * n + c) = 1.0;
  return t;
}

Var binary_loss(Graph& g, Var scores, const Tensor& gold, LossForm form) {
  if (scores.shape() != gold.shape) {
    throw ShapeError("binary_loss: scores " + shape_to_string(scores.shape()) + " vs gold " +
                     shape_to_string(gold.shape));
  }
  Var positive = ops::sum(ops::mul(g.constant(gold), ops::log(scores)));
  if (form == LossForm::kLiteral) return ops::scale(positive, -1.0);
  Tensor negatives = gold;
  for (double& v : negatives.values) v = 1.0 - v;
  Var negative = ops::sum(ops::mul(g.constant(std::move(negatives)), ops::log(ops::one_minus(scores))));
  return ops::scale(ops::add(positive, negative), -1.0);
}

Var aux_loss(Graph& g, Var emotion_scores, Var cause_scores, const Tensor& gold_emotion,
             const Tensor& gold_cause, LossForm form) {
  return ops::add(binary_loss(g, emotion_scores, gold_emotion, form),
                  binary_loss(g, cause_scores, gold_cause, form));
}

Var pair_loss(Graph& g, Var pair_scores, const Tensor& gold_pairs, LossForm form) {
  return binary_loss(g, pair_scores, gold_pairs, form);
}

}  // namespace a2net
