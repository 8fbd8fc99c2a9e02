#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "a2net/encoder.hpp"
#include "test_util.hpp"

namespace a2net {
namespace {

Document doc_of(std::vector<std::vector<std::string>> clauses, std::uint64_t id = 0) {
  Document d;
  d.doc_id = id;
  for (std::size_t i = 0; i < clauses.size(); ++i) d.clauses.push_back(Clause{clauses[i], i});
  return d;
}

struct LookupFixture : ::testing::Test {
  ParameterStore store;
  Rng rng{3};
  Vocabulary vocab = Vocabulary::build({doc_of({{"a", "b"}, {"c"}})});
  ClauseEmbeddingProvider provider = ClauseEmbeddingProvider::lookup(store, vocab, 4, rng);

  std::vector<double> row_of(const std::string& token) const {
    const auto& t = provider.table()->value;
    const auto id = vocab.id(token);
    return {t.values.begin() + static_cast<std::ptrdiff_t>(id * 4),
            t.values.begin() + static_cast<std::ptrdiff_t>(id * 4 + 4)};
  }
};

TEST_F(LookupFixture, SingletonClauseIsTheEmbeddingRow) {
  Graph g;
  const auto x = provider.encode(g, doc_of({{"c"}}), 0.0).value();
  ASSERT_EQ(x.shape, (Shape{1, 4}));
  EXPECT_EQ(x.values, row_of("c"));
}

TEST_F(LookupFixture, MeanPoolingAndUnknownTokens) {
  Graph g;
  const auto x = provider.encode(g, doc_of({{"a", "b"}, {"zzz"}}), 0.0).value();
  ASSERT_EQ(x.shape, (Shape{2, 4}));
  const auto a = row_of("a"), b = row_of("b"), unk = row_of("<unk>");
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(x.at(0, k), 0.5 * (a[k] + b[k]), 1e-15);
    EXPECT_EQ(x.at(1, k), unk[k]);
  }
}

TEST_F(LookupFixture, DuplicateTokensDoNotChangeTheMean) {
  Graph g;
  const auto once = provider.encode(g, doc_of({{"a"}}), 0.0).value();
  const auto twice = provider.encode(g, doc_of({{"a", "a"}}), 0.0).value();
  EXPECT_EQ(once, twice);
}

TEST_F(LookupFixture, GradientsReachTheTable) {
  store.zero_grad();
  Graph g;
  g.backward(ops::sum(provider.encode(g, doc_of({{"a", "b"}, {"a"}}), 0.0)));
  const auto id_a = vocab.id("a"), id_c = vocab.id("c");
  EXPECT_DOUBLE_EQ(provider.table()->grad.at(id_a, 0), 1.5);
  EXPECT_EQ(provider.table()->grad.at(id_c, 0), 0.0);
}

TEST_F(LookupFixture, EvalModeIsPure) {
  const auto d = doc_of({{"a", "b"}, {"c", "a"}});
  Graph g1, g2;
  EXPECT_EQ(provider.encode(g1, d, 0.3).value(), provider.encode(g2, d, 0.3).value());
}

EmbeddingStore sample_store() {
  EmbeddingStore s;
  s.dim = 3;
  s.docs[5] = Tensor({2, 3}, {0.1, -2.5, 3.0, 1e-3, 7.25, -0.0});
  s.docs[9] = Tensor({1, 3}, {1.0, 2.0, 3.0});
  for (auto& [id, t] : s.docs) {
    for (auto& v : t.values) v = static_cast<float>(v);
  }
  return s;
}

// Builds the A2NE byte stream by hand as an independent oracle for the writer.
std::string expected_bytes(const EmbeddingStore& s) {
  std::string out = "A2NE";
  auto u32 = [&](std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  };
  u32(1);
  u32(static_cast<std::uint32_t>(s.dim));
  u32(static_cast<std::uint32_t>(s.docs.size()));
  for (const auto& [id, t] : s.docs) {
    u32(static_cast<std::uint32_t>(id));
    u32(static_cast<std::uint32_t>(t.shape[0]));
    for (double v : t.values) u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(EmbeddingFile, WriterMatchesLayoutAndRoundTrips) {
  test::TempDir dir;
  const auto s = sample_store();
  write_embeddings(s, dir / "e.a2ne");
  EXPECT_EQ(slurp(dir / "e.a2ne"), expected_bytes(s));
  const auto back = read_embeddings(dir / "e.a2ne");
  EXPECT_EQ(back.dim, 3u);
  EXPECT_EQ(back.docs, s.docs);
}

TEST(EmbeddingFile, PrecomputedRowsAreReturnedBitExactly) {
  test::TempDir dir;
  write_embeddings(sample_store(), dir / "e.a2ne");
  auto store = std::make_shared<const EmbeddingStore>(read_embeddings(dir / "e.a2ne"));
  auto provider = ClauseEmbeddingProvider::precomputed(store, 3);
  Graph g;
  const auto x = provider.encode(g, doc_of({{"x"}, {"y"}}, 5), 0.0).value();
  EXPECT_EQ(x, store->docs.at(5));
  EXPECT_THROW(provider.encode(g, doc_of({{"x"}}, 5), 0.0), DataError);
  EXPECT_THROW(provider.encode(g, doc_of({{"x"}}, 77), 0.0), DataError);
  EXPECT_THROW(ClauseEmbeddingProvider::precomputed(store, 4), DataError);
}

TEST(EmbeddingFile, RejectsCorruptFiles) {
  test::TempDir dir;
  const auto good = expected_bytes(sample_store());
  auto write = [&](const std::string& bytes) {
    std::ofstream(dir / "bad.a2ne", std::ios::binary) << bytes;
    return dir / "bad.a2ne";
  };
  EXPECT_THROW(read_embeddings(write("B2NE" + good.substr(4))), DataError);
  std::string wrong_version = good;
  wrong_version[4] = 2;
  EXPECT_THROW(read_embeddings(write(wrong_version)), DataError);
  EXPECT_THROW(read_embeddings(write(good.substr(0, good.size() - 2))), DataError);
  EXPECT_THROW(read_embeddings(write(good + "x")), DataError);
  EXPECT_THROW(read_embeddings(dir / "missing.a2ne"), DataError);
}

TEST(RelativePosition, IndexAndClamping) {
  ParameterStore store;
  Rng rng(1);
  const auto t = RelativePositionTable::create(store, 10, 5, rng);
  EXPECT_EQ(t.index(3, 3), 10u);
  EXPECT_EQ(t.index(4, 3), 9u);
  EXPECT_EQ(t.index(0, 15), t.index(0, 10));
  EXPECT_EQ(t.index(0, 15), 20u);
  EXPECT_EQ(t.index(30, 0), 0u);
  EXPECT_EQ(store.get("encoder/relative_position").value.shape, (Shape{21, 5}));
}

TEST(RelativePosition, GridRowsMatchPointLookups) {
  ParameterStore store;
  Rng rng(2);
  const auto t = RelativePositionTable::create(store, 2, 4, rng);
  Graph g;
  const auto grid = t.lookup_grid(g, 5).value();
  ASSERT_EQ(grid.shape, (Shape{25, 4}));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const auto row = t.lookup(g, i, j).value();
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(grid.at(i * 5 + j, k), row[k]);
    }
  }
}

}  // namespace
}  // namespace a2net
