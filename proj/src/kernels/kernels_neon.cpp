// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

// aarch64 only. vmulq/vaddq are used separately (never vfmaq) to keep the
// scalar rounding sequence.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace decor::kernels::neon {

namespace {
constexpr std::size_t kLanes = 2;
constexpr std::size_t kBlock = 2 * kLanes;
}  // namespace

void gemm_nn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + kBlock <= n; j += kBlock) {
      float64x2_t acc0 = vld1q_f64(ci + j);
      float64x2_t acc1 = vld1q_f64(ci + j + kLanes);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t av = vdupq_n_f64(ai[p]);
        const double* bp = b + p * n + j;
        acc0 = vaddq_f64(acc0, vmulq_f64(av, vld1q_f64(bp)));
        acc1 = vaddq_f64(acc1, vmulq_f64(av, vld1q_f64(bp + kLanes)));
      }
      vst1q_f64(ci + j, acc0);
      vst1q_f64(ci + j + kLanes, acc1);
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
      float64x2_t acc0 = vld1q_f64(ci + j);
      float64x2_t acc1 = vld1q_f64(ci + j + kLanes);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t av = vdupq_n_f64(a[p * m + i]);
        const double* bp = b + p * n + j;
        acc0 = vaddq_f64(acc0, vmulq_f64(av, vld1q_f64(bp)));
        acc1 = vaddq_f64(acc1, vmulq_f64(av, vld1q_f64(bp + kLanes)));
      }
      vst1q_f64(ci + j, acc0);
      vst1q_f64(ci + j + kLanes, acc1);
    }
    for (; j < n; ++j) {
      double acc = ci[j];
      for (std::size_t p = 0; p < k; ++p) acc = acc + a[p * m + i] * b[p * n + j];
      ci[j] = acc;
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void squared_distances(std::size_t rows, std::size_t codes, std::size_t dim, const double* x,
                       const double* codes_t, double* out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xi = x + i * dim;
    double* oi = out + i * codes;
    std::size_t j = 0;
    for (; j + kLanes <= codes; j += kLanes) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t d = 0; d < dim; ++d) {
        const float64x2_t diff = vsubq_f64(vdupq_n_f64(xi[d]), vld1q_f64(codes_t + d * codes + j));
        acc = vaddq_f64(acc, vmulq_f64(diff, diff));
      }
      vst1q_f64(oi + j, acc);
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

}  // namespace decor::kernels::neon
