#pragma once

// Dense kernels behind the affine and matmul primitives.
//
// kernels::serial is the plain reference implementation. The functions in
// kernels:: run the same loops under OpenMP, parallel over output rows, so
// each output element is produced by exactly one thread in the same
// summation order. Results are bit-identical to the serial path for any
// thread count.

#include <cstddef>
#include <span>

namespace a2net::kernels {

struct MatDims {
  std::size_t rows;
  std::size_t inner;
  std::size_t cols;
};

// Work (rows*inner*cols) below which the OpenMP path runs inline.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

namespace serial {

// y[r][o] = b[o] + sum_k x[r][k] * w[o][k]; w is (out x in). b may be empty.
void affine_forward(std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y, MatDims d);
// dx[r][k] += sum_o dy[r][o] * w[o][k]
void affine_backward_input(std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx, MatDims d);
// dw[o][k] += sum_r dy[r][o] * x[r][k]; db[o] += sum_r dy[r][o] (db may be empty)
void affine_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db, MatDims d);

// c = a (rows x inner) * b (inner x cols)
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            MatDims d);
// da += dc * b^T ; db += a^T * dc
void matmul_backward(std::span<const double> dc, std::span<const double> a,
                     std::span<const double> b, std::span<double> da, std::span<double> db,
                     MatDims d);

}  // namespace serial

void affine_forward(std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y, MatDims d);
void affine_backward_input(std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx, MatDims d);
void affine_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db, MatDims d);
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            MatDims d);
void matmul_backward(std::span<const double> dc, std::span<const double> a,
                     std::span<const double> b, std::span<double> da, std::span<double> db,
                     MatDims d);

// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

}  // namespace a2net::kernels
