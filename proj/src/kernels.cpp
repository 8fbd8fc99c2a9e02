#include "a2net/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace a2net::kernels {
namespace {

// Row bodies shared by the serial and OpenMP drivers.

inline void affine_row(std::span<const double> x, std::span<const double> w,
                       std::span<const double> b, std::span<double> y, MatDims d,
                       std::size_t r) {
  const double* xr = x.data() + r * d.inner;
  double* yr = y.data() + r * d.cols;
  for (std::size_t o = 0; o < d.cols; ++o) {
    const double* wo = w.data() + o * d.inner;
    double acc = b.empty() ? 0.0 : b[o];
    for (std::size_t k = 0; k < d.inner; ++k) acc += xr[k] * wo[k];
    yr[o] = acc;
  }
}

inline void affine_dx_row(std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx, MatDims d, std::size_t r) {
  const double* dyr = dy.data() + r * d.cols;
  double* dxr = dx.data() + r * d.inner;
  for (std::size_t o = 0; o < d.cols; ++o) {
    const double g = dyr[o];
    if (g == 0.0) continue;
    const double* wo = w.data() + o * d.inner;
    for (std::size_t k = 0; k < d.inner; ++k) dxr[k] += g * wo[k];
  }
}

inline void affine_dw_row(std::span<const double> dy, std::span<const double> x,
                          std::span<double> dw, std::span<double> db, MatDims d,
                          std::size_t o) {
  double* dwo = dw.data() + o * d.inner;
  double bias_acc = 0.0;
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double g = dy[r * d.cols + o];
    bias_acc += g;
    if (g == 0.0) continue;
    const double* xr = x.data() + r * d.inner;
    for (std::size_t k = 0; k < d.inner; ++k) dwo[k] += g * xr[k];
  }
  if (!db.empty()) db[o] += bias_acc;
}

inline void matmul_row(std::span<const double> a, std::span<const double> b,
                       std::span<double> c, MatDims d, std::size_t i) {
  double* ci = c.data() + i * d.cols;
  for (std::size_t j = 0; j < d.cols; ++j) ci[j] = 0.0;
  for (std::size_t k = 0; k < d.inner; ++k) {
    const double aik = a[i * d.inner + k];
    const double* bk = b.data() + k * d.cols;
    for (std::size_t j = 0; j < d.cols; ++j) ci[j] += aik * bk[j];
  }
}

// da[i][k] += sum_j dc[i][j] * b[k][j]
inline void matmul_da_row(std::span<const double> dc, std::span<const double> b,
                          std::span<double> da, MatDims d, std::size_t i) {
  const double* dci = dc.data() + i * d.cols;
  for (std::size_t k = 0; k < d.inner; ++k) {
    const double* bk = b.data() + k * d.cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < d.cols; ++j) acc += dci[j] * bk[j];
    da[i * d.inner + k] += acc;
  }
}

// db[k][j] += sum_i a[i][k] * dc[i][j]
inline void matmul_db_row(std::span<const double> dc, std::span<const double> a,
                          std::span<double> db, MatDims d, std::size_t k) {
  double* dbk = db.data() + k * d.cols;
  for (std::size_t i = 0; i < d.rows; ++i) {
    const double aik = a[i * d.inner + k];
    if (aik == 0.0) continue;
    const double* dci = dc.data() + i * d.cols;
    for (std::size_t j = 0; j < d.cols; ++j) dbk[j] += aik * dci[j];
  }
}

inline bool worth_parallel(MatDims d) {
  return d.rows * d.inner * d.cols >= kParallelThreshold;
}

}  // namespace

namespace serial {

void affine_forward(std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y, MatDims d) {
  for (std::size_t r = 0; r < d.rows; ++r) affine_row(x, w, b, y, d, r);
}

void affine_backward_input(std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx, MatDims d) {
  for (std::size_t r = 0; r < d.rows; ++r) affine_dx_row(dy, w, dx, d, r);
}

void affine_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db, MatDims d) {
  for (std::size_t o = 0; o < d.cols; ++o) affine_dw_row(dy, x, dw, db, d, o);
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            MatDims d) {
  for (std::size_t i = 0; i < d.rows; ++i) matmul_row(a, b, c, d, i);
}

void matmul_backward(std::span<const double> dc, std::span<const double> a,
                     std::span<const double> b, std::span<double> da, std::span<double> db,
                     MatDims d) {
  if (!da.empty()) {
    for (std::size_t i = 0; i < d.rows; ++i) matmul_da_row(dc, b, da, d, i);
  }
  if (!db.empty()) {
    for (std::size_t k = 0; k < d.inner; ++k) matmul_db_row(dc, a, db, d, k);
  }
}

}  // namespace serial

void affine_forward(std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y, MatDims d) {
  const auto n = static_cast<std::ptrdiff_t>(d.rows);
#pragma omp parallel for schedule(static) if (worth_parallel(d))
  for (std::ptrdiff_t r = 0; r < n; ++r) affine_row(x, w, b, y, d, static_cast<std::size_t>(r));
}

void affine_backward_input(std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx, MatDims d) {
  const auto n = static_cast<std::ptrdiff_t>(d.rows);
#pragma omp parallel for schedule(static) if (worth_parallel(d))
  for (std::ptrdiff_t r = 0; r < n; ++r) affine_dx_row(dy, w, dx, d, static_cast<std::size_t>(r));
}

void affine_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> db, MatDims d) {
  const auto n = static_cast<std::ptrdiff_t>(d.cols);
#pragma omp parallel for schedule(static) if (worth_parallel(d))
  for (std::ptrdiff_t o = 0; o < n; ++o) {
    affine_dw_row(dy, x, dw, db, d, static_cast<std::size_t>(o));
  }
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            MatDims d) {
  const auto n = static_cast<std::ptrdiff_t>(d.rows);
#pragma omp parallel for schedule(static) if (worth_parallel(d))
  for (std::ptrdiff_t i = 0; i < n; ++i) matmul_row(a, b, c, d, static_cast<std::size_t>(i));
}

void matmul_backward(std::span<const double> dc, std::span<const double> a,
                     std::span<const double> b, std::span<double> da, std::span<double> db,
                     MatDims d) {
  const bool par = worth_parallel(d);
  if (!da.empty()) {
    const auto n = static_cast<std::ptrdiff_t>(d.rows);
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      matmul_da_row(dc, b, da, d, static_cast<std::size_t>(i));
    }
  }
  if (!db.empty()) {
    const auto n = static_cast<std::ptrdiff_t>(d.inner);
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      matmul_db_row(dc, a, db, d, static_cast<std::size_t>(k));
    }
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace a2net::kernels
