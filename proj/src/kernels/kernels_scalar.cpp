// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels_impl.hpp"

namespace decor::kernels::scalar {

void gemm_nn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] = ci[j] + aip * bp[j];
    }
  }
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = ap[i];
      double* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] = ci[j] + api * bp[j];
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void squared_distances(std::size_t rows, std::size_t codes, std::size_t dim, const double* x,
                       const double* codes_t, double* out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xi = x + i * dim;
    double* oi = out + i * codes;
    for (std::size_t j = 0; j < codes; ++j) oi[j] = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double xd = xi[d];
      const double* cd = codes_t + d * codes;
      for (std::size_t j = 0; j < codes; ++j) {
        const double diff = xd - cd[j];
        oi[j] = oi[j] + diff * diff;
      }
    }
  }
}

}  // namespace decor::kernels::scalar
