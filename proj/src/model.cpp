#include "a2net/model.hpp"

namespace a2net {
namespace {

ClauseEmbeddingProvider make_provider(const ModelConfig& cfg, EmbeddingSource& source,
                                      ParameterStore& store, Rng& rng) {
  if (cfg.embedding == EmbeddingMode::kLookup) {
    auto* vocab = std::get_if<Vocabulary>(&source);
    if (vocab == nullptr) throw std::invalid_argument("lookup embeddings need a vocabulary");
    return ClauseEmbeddingProvider::lookup(store, std::move(*vocab), cfg.dim, rng);
  }
  auto* rows = std::get_if<std::shared_ptr<const EmbeddingStore>>(&source);
  if (rows == nullptr) throw std::invalid_argument("precomputed embeddings need an embedding store");
  return ClauseEmbeddingProvider::precomputed(*rows, cfg.dim);
}

}  // namespace

A2Net::A2Net(const ModelConfig& config, EmbeddingSource source, std::uint64_t seed) : config_(config) {
  if (config.hidden == 0 || config.dim == 0 || config.mask_dim == 0) {
    throw std::invalid_argument("model widths must be positive");
  }
  Rng rng(seed);
  embeddings_ = make_provider(config_, source, store_, rng);
  positions_ = RelativePositionTable::create(store_, config_.max_offset, config_.dim_pos, rng);
  encoder_ = FeatureEncoder::create(store_, config_.encoding, config_.dim, config_.hidden,
                                    config_.share_gate_params, rng);
  heads_ = PredictionHeads::create(store_, config_.hidden, config_.dim_pos, config_.head_hidden(), rng);
  mask_ = MaskProjections::create(store_, 2 * config_.hidden, config_.head_hidden(), config_.mask_dim, rng);
}

ForwardPass A2Net::forward(Graph& g, const Document& doc, const ForwardOptions& options) const {
  const std::size_t n = doc.size();
  ForwardPass pass;
  Var inputs = embeddings_.encode(g, doc, options.dropout);
  pass.features = encoder_.run(g, inputs);
  pass.representations = task_representations(pass.features);

  Var r_e = pass.representations.emotion;
  Var r_c = pass.representations.cause;
  Var grid = pair_grid_representation(pass.features, positions_.lookup_grid(g, n));
  if (options.dropout > 0.0) {
    const double keep = 1.0 - options.dropout;
    r_e = ops::dropout(r_e, keep);
    r_c = ops::dropout(r_c, keep);
    grid = ops::dropout(grid, keep);
  }

  pass.emotion_scores = heads_.predict_clause(g, r_e, ClauseHead::kEmotion);
  pass.cause_scores = heads_.predict_clause(g, r_c, ClauseHead::kCause);
  pass.pair_scores = heads_.predict_pair(g, grid, n);

  pass.losses.pair = pair_loss(g, pass.pair_scores, pair_indicator(doc.pairs, n), options.loss_form);
  pass.losses.aux = aux_loss(g, pass.emotion_scores, pass.cause_scores, clause_indicator(doc.emotions, n),
                             clause_indicator(doc.causes, n), options.loss_form);
  if (options.ita != ItaMode::kOff) {
    pass.alpha = mask_.mask_scores(g, r_e, r_c);
    pass.pseudo_scores = pseudo_pair_scores(pass.emotion_scores, pass.cause_scores, pass.alpha);
    pass.losses.kl = kl_loss(pass.pseudo_scores, pass.pair_scores, options.ita, options.detach);
  }
  return pass;
}

ScoreMatrices A2Net::predict(const Document& doc) const {
  Graph g;
  ForwardOptions options;
  options.ita = ItaMode::kOff;
  return score_matrices(forward(g, doc, options));
}

ScoreMatrices score_matrices(const ForwardPass& pass) {
  ScoreMatrices s;
  s.emotion = pass.emotion_scores.value().values;
  s.cause = pass.cause_scores.value().values;
  s.pair = pass.pair_scores.value();
  return s;
}

}  // namespace a2net
