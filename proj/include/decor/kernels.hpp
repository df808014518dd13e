// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

// Arithmetic inner loops behind the dense layers and K-means.
//
// Every kernel has a scalar reference implementation and optional AVX2 (x86-64)
// and NEON (aarch64) variants. The variants vectorize across independent output
// elements only; each output element is accumulated in the same order with
// separate multiply and add as the scalar loop. Results are therefore
// bit-identical across ISAs, which keeps runs reproducible regardless of the
// host CPU. The equivalence is checked exactly in tests/kernels_test.cpp.

namespace decor::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

struct KernelTable {
  Isa isa;

  /// C[m x n] += A[m x k] * B[k x n]. Row-major, contiguous.
  void (*gemm_nn_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                      double* c);

  /// C[m x n] += A^T * B with A stored k x m and B stored k x n.
  void (*gemm_tn_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                      double* c);

  /// y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

  /// out[i * codes + j] = ||x_i - code_j||^2 for x (rows x dim) and the codebook
  /// given transposed (dim x codes).
  void (*squared_distances)(std::size_t rows, std::size_t codes, std::size_t dim, const double* x,
                            const double* codes_t, double* out);
};

const KernelTable& scalar_table() noexcept;

/// Tables compiled in and supported by the running CPU, scalar first.
std::vector<const KernelTable*> available_tables();

/// The table used by the library. Defaults to the widest supported ISA; the
/// environment variable DECOR_KERNELS=scalar|avx2|neon overrides on first use.
const KernelTable& active() noexcept;

/// Forces a specific ISA. Returns false when it is not available.
bool select(Isa isa) noexcept;

// Variant tables; nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

}  // namespace decor::kernels
