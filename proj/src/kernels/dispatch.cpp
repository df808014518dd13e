// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>

#include "kernels_impl.hpp"

namespace decor::kernels {

namespace {

constexpr KernelTable kScalar{Isa::kScalar, scalar::gemm_nn_acc, scalar::gemm_tn_acc, scalar::axpy,
                              scalar::squared_distances};

#if defined(DECOR_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::kAvx2, avx2::gemm_nn_acc, avx2::gemm_tn_acc, avx2::axpy,
                            avx2::squared_distances};
#endif

#if defined(DECOR_HAVE_NEON)
constexpr KernelTable kNeon{Isa::kNeon, neon::gemm_nn_acc, neon::gemm_tn_acc, neon::axpy,
                            neon::squared_distances};
#endif

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return &kScalar;
    case Isa::kAvx2:
      return avx2_table();
    case Isa::kNeon:
      return neon_table();
  }
  return nullptr;
}

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("DECOR_KERNELS")) {
    if (auto isa = parse_isa(env)) {
      if (const KernelTable* t = table_for(*isa)) return t;
    }
  }
  if (const KernelTable* t = avx2_table()) return t;
  if (const KernelTable* t = neon_table()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) noexcept {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "neon") return Isa::kNeon;
  return std::nullopt;
}

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(DECOR_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() noexcept {
#if defined(DECOR_HAVE_NEON)
  return &kNeon;  // mandatory on aarch64
#else
  return nullptr;
#endif
}

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> tables{&kScalar};
  if (const KernelTable* t = avx2_table()) tables.push_back(t);
  if (const KernelTable* t = neon_table()) tables.push_back(t);
  return tables;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(Isa isa) noexcept {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace decor::kernels
