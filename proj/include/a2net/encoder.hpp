#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>

#include "a2net/data.hpp"
#include "a2net/layers.hpp"

namespace a2net {

// Precomputed clause representations keyed by doc_id.
//
// On-disk layout ("A2NE" v1, all integers little-endian u32):
//   magic "A2NE" | version=1 | dim | num_docs |
//   num_docs x { doc_id | n_clauses | n_clauses*dim float32 (LE) }
struct EmbeddingStore {
  std::size_t dim = 0;
  std::map<std::uint64_t, Tensor> docs;  // (n_clauses, dim), widened to double
};

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

EmbeddingStore read_embeddings(const std::filesystem::path& path);
// Values are narrowed to float32 on write.
void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);

enum class EmbeddingMode { kLookup, kPrecomputed };

class ClauseEmbeddingProvider {
 public:
  // Trainable token table, mean-pooled per clause.
  static ClauseEmbeddingProvider lookup(ParameterStore& store, Vocabulary vocabulary,
                                        std::size_t dim, Rng& rng);
  // Fixed rows from `embeddings`; throws if its width differs from `dim`.
  static ClauseEmbeddingProvider precomputed(std::shared_ptr<const EmbeddingStore> embeddings,
                                             std::size_t dim);

  EmbeddingMode mode() const { return mode_; }
  std::size_t dim() const { return dim_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  Parameter* table() const { return table_; }

  // (N, dim) clause representations; dropout is applied in training graphs.
  Var encode(Graph& g, const Document& doc, double dropout_rate) const;

 private:
  EmbeddingMode mode_ = EmbeddingMode::kLookup;
  std::size_t dim_ = 0;
  Vocabulary vocabulary_;
  Parameter* table_ = nullptr;
  std::shared_ptr<const EmbeddingStore> embeddings_;
};

class RelativePositionTable {
 public:
  static RelativePositionTable create(ParameterStore& store, std::size_t max_offset,
                                      std::size_t dim_pos, Rng& rng);

  std::size_t max_offset() const { return max_offset_; }
  std::size_t dim() const { return table_->value.shape[1]; }
  Parameter& table() const { return *table_; }

  // clamp(j - i, -K, K) + K
  std::size_t index(std::size_t i, std::size_t j) const;
  // (1, dim_pos) row for the pair (i, j).
  Var lookup(Graph& g, std::size_t i, std::size_t j) const;
  // (n*n, dim_pos), row i*n + j holds e_ij.
  Var lookup_grid(Graph& g, std::size_t n) const;

 private:
  std::size_t max_offset_ = 0;
  Parameter* table_ = nullptr;
};

}  // namespace a2net
