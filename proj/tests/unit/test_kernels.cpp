#include <gtest/gtest.h>

#include <random>

#include "a2net/kernels.hpp"

namespace a2net::kernels {
namespace {

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Sizes straddle kParallelThreshold so both the inline and the threaded path run.
const MatDims kSizes[] = {{1, 3, 2}, {7, 5, 3}, {64, 40, 30}, {100, 64, 33}};

TEST(Kernels, AffineForwardMatchesSerialBitwise) {
  std::mt19937_64 rng(1);
  for (auto d : kSizes) {
    const auto x = random_values(d.rows * d.inner, rng);
    const auto w = random_values(d.cols * d.inner, rng);
    const auto b = random_values(d.cols, rng);
    std::vector<double> ys(d.rows * d.cols), yp(d.rows * d.cols);
    serial::affine_forward(x, w, b, ys, d);
    affine_forward(x, w, b, yp, d);
    EXPECT_EQ(ys, yp);
    serial::affine_forward(x, w, {}, ys, d);
    affine_forward(x, w, {}, yp, d);
    EXPECT_EQ(ys, yp);
  }
}

TEST(Kernels, AffineForwardMatchesNaiveLoop) {
  std::mt19937_64 rng(2);
  const MatDims d{4, 3, 2};
  const auto x = random_values(12, rng);
  const auto w = random_values(6, rng);
  const auto b = random_values(2, rng);
  std::vector<double> y(8);
  affine_forward(x, w, b, y, d);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t o = 0; o < 2; ++o) {
      double acc = b[o];
      for (std::size_t k = 0; k < 3; ++k) acc += x[r * 3 + k] * w[o * 3 + k];
      EXPECT_NEAR(y[r * 2 + o], acc, 1e-14);
    }
  }
}

TEST(Kernels, AffineBackwardMatchesSerialBitwise) {
  std::mt19937_64 rng(3);
  for (auto d : kSizes) {
    const auto x = random_values(d.rows * d.inner, rng);
    const auto w = random_values(d.cols * d.inner, rng);
    const auto dy = random_values(d.rows * d.cols, rng);
    std::vector<double> dxs(d.rows * d.inner, 0.5), dxp(d.rows * d.inner, 0.5);
    serial::affine_backward_input(dy, w, dxs, d);
    affine_backward_input(dy, w, dxp, d);
    EXPECT_EQ(dxs, dxp);
    std::vector<double> dws(d.cols * d.inner), dwp(d.cols * d.inner), dbs(d.cols), dbp(d.cols);
    serial::affine_backward_params(dy, x, dws, dbs, d);
    affine_backward_params(dy, x, dwp, dbp, d);
    EXPECT_EQ(dws, dwp);
    EXPECT_EQ(dbs, dbp);
  }
}

TEST(Kernels, MatmulMatchesSerialBitwise) {
  std::mt19937_64 rng(4);
  for (auto d : kSizes) {
    const auto a = random_values(d.rows * d.inner, rng);
    const auto b = random_values(d.inner * d.cols, rng);
    std::vector<double> cs(d.rows * d.cols), cp(d.rows * d.cols);
    serial::matmul(a, b, cs, d);
    matmul(a, b, cp, d);
    EXPECT_EQ(cs, cp);

    const auto dc = random_values(d.rows * d.cols, rng);
    std::vector<double> das(a.size()), dap(a.size()), dbs(b.size()), dbp(b.size());
    serial::matmul_backward(dc, a, b, das, dbs, d);
    matmul_backward(dc, a, b, dap, dbp, d);
    EXPECT_EQ(das, dap);
    EXPECT_EQ(dbs, dbp);
  }
}

TEST(Kernels, ThreadCountIsPositive) { EXPECT_GE(max_threads(), 1); }

}  // namespace
}  // namespace a2net::kernels
