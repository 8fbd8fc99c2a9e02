#include "a2net/encoder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace a2net {
namespace {

constexpr std::array<char, 4> kMagic{'A', '2', 'N', 'E'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw DataError(std::string("embeddings: truncated file while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

EmbeddingStore read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw DataError("embeddings: bad magic in " + path.string());
  const auto version = get_u32(in, "version");
  if (version != kEmbeddingFormatVersion) {
    throw DataError("embeddings: unsupported version " + std::to_string(version));
  }
  EmbeddingStore store;
  store.dim = get_u32(in, "dim");
  if (store.dim == 0) throw DataError("embeddings: dim must be positive");
  const auto num_docs = get_u32(in, "num_docs");
  for (std::uint32_t d = 0; d < num_docs; ++d) {
    const std::uint64_t doc_id = get_u32(in, "doc_id");
    const std::size_t n = get_u32(in, "n_clauses");
    Tensor rows = Tensor::zeros({n, store.dim});
    for (double& v : rows.values) {
      const std::uint32_t bits = get_u32(in, "values");
      v = static_cast<double>(std::bit_cast<float>(bits));
    }
    if (!store.docs.emplace(doc_id, std::move(rows)).second) {
      throw DataError("embeddings: duplicate doc_id " + std::to_string(doc_id));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("embeddings: trailing bytes");
  return store;
}

void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embeddings " + path.string());
  out.write(kMagic.data(), 4);
  put_u32(out, kEmbeddingFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(store.dim));
  put_u32(out, static_cast<std::uint32_t>(store.docs.size()));
  for (const auto& [doc_id, rows] : store.docs) {
    if (rows.rank() != 2 || rows.shape[1] != store.dim) {
      throw DataError("embeddings: doc " + std::to_string(doc_id) + " has width != dim");
    }
    put_u32(out, static_cast<std::uint32_t>(doc_id));
    put_u32(out, static_cast<std::uint32_t>(rows.shape[0]));
    for (double v : rows.values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
}

ClauseEmbeddingProvider ClauseEmbeddingProvider::lookup(ParameterStore& store, Vocabulary vocabulary,
                                                        std::size_t dim, Rng& rng) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
  ClauseEmbeddingProvider p;
  p.mode_ = EmbeddingMode::kLookup;
  p.dim_ = dim;
  p.table_ = &store.add("encoder/token_embedding", normal_tensor({vocabulary.size(), dim}, 1.0, rng));
  p.vocabulary_ = std::move(vocabulary);
  return p;
}

ClauseEmbeddingProvider ClauseEmbeddingProvider::precomputed(
    std::shared_ptr<const EmbeddingStore> embeddings, std::size_t dim) {
  if (!embeddings) throw std::invalid_argument("precomputed provider needs an embedding store");
  if (embeddings->dim != dim) {
    throw DataError("embeddings: file dim " + std::to_string(embeddings->dim) +
                    " does not match model dim " + std::to_string(dim));
  }
  ClauseEmbeddingProvider p;
  p.mode_ = EmbeddingMode::kPrecomputed;
  p.dim_ = dim;
  p.embeddings_ = std::move(embeddings);
  return p;
}

Var ClauseEmbeddingProvider::encode(Graph& g, const Document& doc, double dropout_rate) const {
  const std::size_t n = doc.size();
  Var x;
  if (mode_ == EmbeddingMode::kPrecomputed) {
    auto it = embeddings_->docs.find(doc.doc_id);
    if (it == embeddings_->docs.end()) {
      throw DataError("embeddings: no rows for doc_id " + std::to_string(doc.doc_id));
    }
    if (it->second.shape[0] != n) {
      throw DataError("embeddings: doc_id " + std::to_string(doc.doc_id) + " has " +
                      std::to_string(it->second.shape[0]) + " rows for " + std::to_string(n) + " clauses");
    }
    x = g.constant(it->second);
  } else {
    std::vector<std::size_t> ids;
    std::vector<std::size_t> owner;
    for (const auto& c : doc.clauses) {
      for (const auto& t : c.tokens) {
        ids.push_back(vocabulary_.id(t));
        owner.push_back(c.index);
      }
    }
    Tensor pool = Tensor::zeros({n, ids.size()});
    for (std::size_t t = 0; t < ids.size(); ++t) {
      pool.at(owner[t], t) = 1.0 / static_cast<double>(doc.clauses[owner[t]].tokens.size());
    }
    x = ops::matmul(g.constant(std::move(pool)), ops::gather_rows(g.param(*table_), std::move(ids)));
  }
  if (dropout_rate > 0.0) x = ops::dropout(x, 1.0 - dropout_rate);
  return x;
}

RelativePositionTable RelativePositionTable::create(ParameterStore& store, std::size_t max_offset,
                                                    std::size_t dim_pos, Rng& rng) {
  if (max_offset == 0 || dim_pos == 0) throw std::invalid_argument("position table sizes must be positive");
  RelativePositionTable t;
  t.max_offset_ = max_offset;
  t.table_ = &store.add("encoder/relative_position", uniform_tensor({2 * max_offset + 1, dim_pos}, 0.1, rng));
  return t;
}

std::size_t RelativePositionTable::index(std::size_t i, std::size_t j) const {
  const auto k = static_cast<std::ptrdiff_t>(max_offset_);
  const auto offset = std::clamp(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i), -k, k);
  return static_cast<std::size_t>(offset + k);
}

Var RelativePositionTable::lookup(Graph& g, std::size_t i, std::size_t j) const {
  return ops::gather_rows(g.param(*table_), {index(i, j)});
}

Var RelativePositionTable::lookup_grid(Graph& g, std::size_t n) const {
  std::vector<std::size_t> rows;
  rows.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rows.push_back(index(i, j));
  }
  return ops::gather_rows(g.param(*table_), std::move(rows));
}

}  // namespace a2net
