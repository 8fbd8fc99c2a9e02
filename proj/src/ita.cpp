#include "a2net/ita.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace a2net {

std::string_view to_string(ItaMode m) {
  switch (m) {
    case ItaMode::kBoth: return "both";
    case ItaMode::kP2E: return "p2e";
    case ItaMode::kE2P: return "e2p";
    case ItaMode::kOff: return "off";
  }
  return "both";
}

ItaMode parse_ita_mode(std::string_view s) {
  if (s == "both") return ItaMode::kBoth;
  if (s == "p2e") return ItaMode::kP2E;
  if (s == "e2p") return ItaMode::kE2P;
  if (s == "off") return ItaMode::kOff;
  throw std::invalid_argument("unknown ita mode '" + std::string(s) + "'");
}

std::string_view to_string(DetachSide d) {
  switch (d) {
    case DetachSide::kNone: return "none";
    case DetachSide::kPseudo: return "pseudo";
    case DetachSide::kPair: return "pair";
  }
  return "none";
}

DetachSide parse_detach_side(std::string_view s) {
  if (s == "none") return DetachSide::kNone;
  if (s == "pseudo") return DetachSide::kPseudo;
  if (s == "pair") return DetachSide::kPair;
  throw std::invalid_argument("unknown detach side '" + std::string(s) + "'");
}

MaskProjections MaskProjections::create(ParameterStore& store, std::size_t input_width,
                                        std::size_t ffn_hidden, std::size_t dim, Rng& rng) {
  MaskProjections m;
  m.emotion_ = Ffn::create(store, "ita/emotion_projection", input_width, ffn_hidden, dim, rng);
  m.cause_ = Ffn::create(store, "ita/cause_projection", input_width, ffn_hidden, dim, rng);
  m.dim_ = dim;
  return m;
}

Var MaskProjections::mask_scores(Graph& g, Var emotion_repr, Var cause_repr) const {
  return mask_from_vectors(emotion_(g, emotion_repr), cause_(g, cause_repr));
}

Var mask_logits(Var emotion_vectors, Var cause_vectors) {
  if (emotion_vectors.shape() != cause_vectors.shape() || emotion_vectors.shape().size() != 2) {
    throw ShapeError("mask: projection shapes " + shape_to_string(emotion_vectors.shape()) + " and " +
                     shape_to_string(cause_vectors.shape()));
  }
  const double d = static_cast<double>(emotion_vectors.shape()[1]);
  return ops::scale(ops::matmul(emotion_vectors, ops::transpose(cause_vectors)), 1.0 / std::sqrt(d));
}

Var mask_from_vectors(Var emotion_vectors, Var cause_vectors) {
  return ops::softmax(mask_logits(emotion_vectors, cause_vectors));
}

Var pseudo_pair_scores(Var emotion_scores, Var cause_scores, Var alpha) {
  const std::size_t n = emotion_scores.value().size();
  if (cause_scores.value().size() != n || alpha.shape() != Shape{n, n}) {
    throw ShapeError("pseudo_pair_scores: expected (N), (N), (N, N)");
  }
  Var outer = ops::matmul(ops::reshape(emotion_scores, {n, 1}), ops::reshape(cause_scores, {1, n}));
  return ops::mul(alpha, ops::sqrt(outer));
}

Var kl_loss(Var pseudo, Var pair, ItaMode mode, DetachSide detach) {
  if (mode == ItaMode::kOff) throw std::invalid_argument("kl_loss: ITA is off");
  if (pseudo.shape() != pair.shape()) {
    throw ShapeError("kl_loss: shapes " + shape_to_string(pseudo.shape()) + " and " +
                     shape_to_string(pair.shape()));
  }
  if (detach == DetachSide::kPseudo) pseudo = ops::detach(pseudo);
  if (detach == DetachSide::kPair) pair = ops::detach(pair);

  Var log_ratio = ops::sub(ops::log(pseudo), ops::log(pair));  // log(y~ / y)
  Var pseudo_term = ops::mul(pseudo, log_ratio);
  Var pair_term = ops::mul(pair, ops::scale(log_ratio, -1.0));
  Var cells;
  switch (mode) {
    case ItaMode::kBoth: cells = ops::add(pseudo_term, pair_term); break;
    case ItaMode::kP2E: cells = pseudo_term; break;
    case ItaMode::kE2P: cells = pair_term; break;
    case ItaMode::kOff: break;
  }
  return ops::scale(ops::sum(cells), 0.5);
}

}  // namespace a2net
