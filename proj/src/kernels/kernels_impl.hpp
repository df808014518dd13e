// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "decor/kernels.hpp"

namespace decor::kernels {

#define DECOR_KERNEL_DECLS                                                                        \
  void gemm_nn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, \
                   double* c);                                                                    \
  void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, \
                   double* c);                                                                    \
  void axpy(std::size_t n, double alpha, const double* x, double* y);                             \
  void squared_distances(std::size_t rows, std::size_t codes, std::size_t dim, const double* x,   \
                         const double* codes_t, double* out);

namespace scalar {
DECOR_KERNEL_DECLS
}
namespace avx2 {
DECOR_KERNEL_DECLS
}
namespace neon {
DECOR_KERNEL_DECLS
}

#undef DECOR_KERNEL_DECLS

}  // namespace decor::kernels
