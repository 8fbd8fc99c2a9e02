#pragma once

// Inter-task alignment: pseudo pair scores built from the emotion and cause
// heads, softly masked, and a KL penalty tying them to the pair head.

#include <string_view>

#include "a2net/layers.hpp"

namespace a2net {

enum class ItaMode {
  kBoth,  // 1/2 sum [ y~ log(y~/y) + y log(y/y~) ]
  kP2E,   // pair scores aligned to EE x CE: keeps only y~ log(y~/y)
  kE2P,   // EE x CE aligned to pair scores: keeps only y log(y/y~)
  kOff,
};

enum class DetachSide { kNone, kPseudo, kPair };

std::string_view to_string(ItaMode m);
ItaMode parse_ita_mode(std::string_view s);
std::string_view to_string(DetachSide d);
DetachSide parse_detach_side(std::string_view s);

class MaskProjections {
 public:
  static MaskProjections create(ParameterStore& store, std::size_t input_width, std::size_t ffn_hidden,
                                std::size_t dim, Rng& rng);

  std::size_t dim() const { return dim_; }
  // alpha (N, N): row-softmax over j of (v_e[i] . v_c[j]) / sqrt(d)
  Var mask_scores(Graph& g, Var emotion_repr, Var cause_repr) const;

  const Ffn& emotion() const { return emotion_; }
  const Ffn& cause() const { return cause_; }

 private:
  Ffn emotion_;
  Ffn cause_;
  std::size_t dim_ = 0;
};

// t_ij = (v_e[i] . v_c[j]) / sqrt(d) for v_e (N, d), v_c (N, d).
Var mask_logits(Var emotion_vectors, Var cause_vectors);
Var mask_from_vectors(Var emotion_vectors, Var cause_vectors);

// y~_ij = alpha_ij * sqrt(y_e[i] * y_c[j])
Var pseudo_pair_scores(Var emotion_scores, Var cause_scores, Var alpha);

// Both grids are clamped to [1e-12, 1] inside the logs. Throws ShapeError on
// mismatched grids and std::invalid_argument for ItaMode::kOff.
Var kl_loss(Var pseudo, Var pair, ItaMode mode, DetachSide detach = DetachSide::kNone);

}  // namespace a2net
