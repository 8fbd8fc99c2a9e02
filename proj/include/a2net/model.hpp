#pragma once

#include <memory>
#include <variant>

#include "a2net/encoder.hpp"
#include "a2net/heads.hpp"
#include "a2net/ita.hpp"
#include "a2net/recurrent.hpp"

namespace a2net {

struct ModelConfig {
  EmbeddingMode embedding = EmbeddingMode::kLookup;
  std::size_t dim = 64;          // clause representation width
  std::size_t hidden = 300;      // partition filter hidden size
  std::size_t dim_pos = 50;      // relative position embedding width
  std::size_t max_offset = 10;   // position offsets clamped to [-K, K]
  std::size_t mask_dim = 64;     // width d of the soft-mask projections
  std::size_t ffn_hidden = 0;    // 0 selects max(1, hidden / 2)
  Encoding encoding = Encoding::kPfn;
  bool share_gate_params = false;

  std::size_t head_hidden() const { return ffn_hidden ? ffn_hidden : std::max<std::size_t>(1, hidden / 2); }
};

struct ForwardOptions {
  double dropout = 0.0;
  ItaMode ita = ItaMode::kBoth;
  DetachSide detach = DetachSide::kNone;
  LossForm loss_form = LossForm::kBinaryCrossEntropy;
};

struct LossTerms {
  Var pair;
  Var aux;
  Var kl;  // invalid when ITA is off
};

struct ForwardPass {
  SequenceFeatures features;
  TaskRepresentations representations;
  Var emotion_scores;  // (N)
  Var cause_scores;    // (N)
  Var pair_scores;     // (N, N)
  Var alpha;           // (N, N), invalid when ITA is off
  Var pseudo_scores;   // (N, N), invalid when ITA is off
  LossTerms losses;
};

// Either the training vocabulary (trainable lookup) or precomputed rows.
using EmbeddingSource = std::variant<Vocabulary, std::shared_ptr<const EmbeddingStore>>;

class A2Net {
 public:
  A2Net(const ModelConfig& config, EmbeddingSource source, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ClauseEmbeddingProvider& embeddings() const { return embeddings_; }
  const RelativePositionTable& positions() const { return positions_; }
  const FeatureEncoder& feature_encoder() const { return encoder_; }
  const PredictionHeads& heads() const { return heads_; }
  const MaskProjections& mask() const { return mask_; }

  ForwardPass forward(Graph& g, const Document& doc, const ForwardOptions& options) const;
  // Eval-mode scores on a private graph.
  ScoreMatrices predict(const Document& doc) const;

 private:
  ModelConfig config_;
  ParameterStore store_;
  ClauseEmbeddingProvider embeddings_;
  RelativePositionTable positions_;
  FeatureEncoder encoder_;
  PredictionHeads heads_;
  MaskProjections mask_;
};

ScoreMatrices score_matrices(const ForwardPass& pass);

}  // namespace a2net
