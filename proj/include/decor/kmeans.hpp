// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "decor/matrix.hpp"

namespace decor {

/// K code vectors, one per row.
struct Codebook {
  Matrix codes;

  std::size_t size() const noexcept { return codes.rows(); }
  std::size_t dim() const noexcept { return codes.cols(); }
};

/// Nearest-code index per sample, each in [0, codebook_size).
struct IndexAssignment {
  std::vector<std::uint32_t> indices;
  std::size_t codebook_size = 0;

  std::size_t size() const noexcept { return indices.size(); }
  friend bool operator==(const IndexAssignment&, const IndexAssignment&) = default;
};

struct KMeansOptions {
  std::size_t k = 32;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  /// Stop once (J_prev - J) <= tol * J_prev.
  double tol = 1e-6;
  /// Independent k-means++ restarts; the lowest final objective wins.
  std::size_t restarts = 10;
};

struct KMeansResult {
  Codebook codebook;
  IndexAssignment assignment;
  double objective = 0.0;
  /// Objective after every assignment step of the winning restart.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeds. The returned assignment comes from a
/// final pass against the returned centroids.
/// Throws ConfigError when K is 0 or exceeds the sample count, NumericError on
/// non-finite features.
KMeansResult kmeans_fit(const Matrix& features, const KMeansOptions& options);

/// Lloyd's algorithm from the given initial centroids (single run). Once Lloyd
/// stalls, Hartigan single-point transfers are tried; if any sample moves, Lloyd
/// resumes from the new partition. Every step lowers or keeps the objective.
KMeansResult kmeans_fit_from(const Matrix& features, Codebook initial, const KMeansOptions& options);

/// k-means++ seeding.
Codebook kmeans_plus_plus(const Matrix& features, std::size_t k, std::uint64_t seed);

/// argmin_i ||feature - code_i||^2, ties to the lowest index.
std::size_t assign_nearest(const Codebook& codebook, std::span<const double> feature);

/// Nearest code for every row, through the active distance kernel.
IndexAssignment assign_all(const Codebook& codebook, const Matrix& features);

/// sum_i ||x_i - C[a_i]||^2
double kmeans_objective(const Codebook& codebook, const Matrix& features, const IndexAssignment& assignment);

}  // namespace decor
