// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace decor {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Named sub-seed: every random stream in a run is derived from the run seed,
/// a component name and optional indices (task, epoch, batch).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                                    std::initializer_list<std::uint64_t> indices = {}) noexcept {
  std::uint64_t h = mix64(seed ^ fnv1a(name));
  for (std::uint64_t i : indices) h = mix64(h ^ mix64(i + 0x51ed270b27a4f3c5ULL));
  return h;
}

}  // namespace decor
