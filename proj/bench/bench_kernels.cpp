#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "a2net/kernels.hpp"

namespace {

using a2net::kernels::MatDims;

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// rows = clauses^2 pair grid, inner = input width, cols = FFN width
MatDims dims_of(const benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return {n * n, 650, 150};
}

template <bool Parallel>
void BM_AffineForward(benchmark::State& state) {
  const auto d = dims_of(state);
  const auto x = random_values(d.rows * d.inner, 1);
  const auto w = random_values(d.cols * d.inner, 2);
  const auto b = random_values(d.cols, 3);
  std::vector<double> y(d.rows * d.cols);
  for (auto _ : state) {
    if constexpr (Parallel) {
      a2net::kernels::affine_forward(x, w, b, y, d);
    } else {
      a2net::kernels::serial::affine_forward(x, w, b, y, d);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * d.rows * d.inner * d.cols));
}

template <bool Parallel>
void BM_AffineBackwardParams(benchmark::State& state) {
  const auto d = dims_of(state);
  const auto x = random_values(d.rows * d.inner, 1);
  const auto dy = random_values(d.rows * d.cols, 2);
  std::vector<double> dw(d.cols * d.inner), db(d.cols);
  for (auto _ : state) {
    if constexpr (Parallel) {
      a2net::kernels::affine_backward_params(dy, x, dw, db, d);
    } else {
      a2net::kernels::serial::affine_backward_params(dy, x, dw, db, d);
    }
    benchmark::DoNotOptimize(dw.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * d.rows * d.inner * d.cols));
}

}  // namespace

BENCHMARK(BM_AffineForward<false>)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_AffineForward<true>)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_AffineBackwardParams<false>)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_AffineBackwardParams<true>)->Arg(8)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
