// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 only (never -mfma): every lane does mul then add, exactly
// like the scalar reference, so the two agree bit for bit.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace decor::kernels::avx2 {

namespace {
constexpr std::size_t kLanes = 4;
constexpr std::size_t kBlock = 2 * kLanes;
}  // namespace

void gemm_nn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + kBlock <= n; j += kBlock) {
      __m256d acc0 = _mm256_loadu_pd(ci + j);
      __m256d acc1 = _mm256_loadu_pd(ci + j + kLanes);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(ai + p);
        const double* bp = b + p * n + j;
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(av, _mm256_loadu_pd(bp)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(av, _mm256_loadu_pd(bp + kLanes)));
      }
      _mm256_storeu_pd(ci + j, acc0);
      _mm256_storeu_pd(ci + j + kLanes, acc1);
    }
    for (; j + kLanes <= n; j += kLanes) {
      __m256d acc = _mm256_loadu_pd(ci + j);
      for (std::size_t p = 0; p < k; ++p) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(ai + p), _mm256_loadu_pd(b + p * n + j)));
      }
      _mm256_storeu_pd(ci + j, acc);
    }
    for (; j < n; ++j) {
      double acc = ci[j];
      for (std::size_t p = 0; p < k; ++p) acc = acc + ai[p] * b[p * n + j];
      ci[j] = acc;
    }
  }
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + kBlock <= n; j += kBlock) {
      __m256d acc0 = _mm256_loadu_pd(ci + j);
      __m256d acc1 = _mm256_loadu_pd(ci + j + kLanes);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(a + p * m + i);
        const double* bp = b + p * n + j;
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(av, _mm256_loadu_pd(bp)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(av, _mm256_loadu_pd(bp + kLanes)));
      }
      _mm256_storeu_pd(ci + j, acc0);
      _mm256_storeu_pd(ci + j + kLanes, acc1);
    }
    for (; j + kLanes <= n; j += kLanes) {
      __m256d acc = _mm256_loadu_pd(ci + j);
      for (std::size_t p = 0; p < k; ++p) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(a + p * m + i),
                                               _mm256_loadu_pd(b + p * n + j)));
      }
      _mm256_storeu_pd(ci + j, acc);
    }
    for (; j < n; ++j) {
      double acc = ci[j];
      for (std::size_t p = 0; p < k; ++p) acc = acc + a[p * m + i] * b[p * n + j];
      ci[j] = acc;
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void squared_distances(std::size_t rows, std::size_t codes, std::size_t dim, const double* x,
                       const double* codes_t, double* out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xi = x + i * dim;
    double* oi = out + i * codes;
    std::size_t j = 0;
    for (; j + kBlock <= codes; j += kBlock) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (std::size_t d = 0; d < dim; ++d) {
        const __m256d xv = _mm256_broadcast_sd(xi + d);
        const double* cd = codes_t + d * codes + j;
        const __m256d d0 = _mm256_sub_pd(xv, _mm256_loadu_pd(cd));
        const __m256d d1 = _mm256_sub_pd(xv, _mm256_loadu_pd(cd + kLanes));
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
      }
      _mm256_storeu_pd(oi + j, acc0);
      _mm256_storeu_pd(oi + j + kLanes, acc1);
    }
    for (; j + kLanes <= codes; j += kLanes) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t d = 0; d < dim; ++d) {
        const __m256d diff =
            _mm256_sub_pd(_mm256_broadcast_sd(xi + d), _mm256_loadu_pd(codes_t + d * codes + j));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
      }
      _mm256_storeu_pd(oi + j, acc);
    }
    for (; j < codes; ++j) {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = xi[d] - codes_t[d * codes + j];
        acc = acc + diff * diff;
      }
      oi[j] = acc;
    }
  }
}

}  // namespace decor::kernels::avx2
