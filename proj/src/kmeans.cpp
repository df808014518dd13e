// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <span>
#include <string>

#include "decor/errors.hpp"
#include "decor/kernels.hpp"
#include "decor/rng.hpp"

namespace decor {

namespace {

struct Assignment {
  IndexAssignment index;
  std::vector<double> distance;  // squared distance to the assigned code
  double objective = 0.0;
};

Assignment assign_with_distances(const Codebook& codebook, const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t k = codebook.size();
  const Matrix codes_t = codebook.codes.transposed();
  Matrix dist(n, k);
  kernels::active().squared_distances(n, k, features.cols(), features.data(), codes_t.data(), dist.data());

  Assignment a;
  a.index.codebook_size = k;
  a.index.indices.resize(n);
  a.distance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dist.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (row[j] < row[best]) best = j;
    }
    a.index.indices[i] = static_cast<std::uint32_t>(best);
    a.distance[i] = row[best];
    a.objective += row[best];
  }
  return a;
}

void validate_features(const Matrix& features, std::size_t k) {
  if (k == 0) throw ConfigError("codebook size must be at least 1", "K");
  if (features.rows() < k) {
    throw ConfigError("K-means needs at least K samples (" + std::to_string(features.rows()) + " < " +
                          std::to_string(k) + ")",
                      "K");
  }
  if (features.cols() == 0) throw ShapeError("K-means on zero-dimensional features");
  if (!all_finite(features.values())) throw NumericError("K-means on non-finite features");
}

/// Centroid update. Empty clusters take the sample farthest from its code.
Codebook update_centroids(const Matrix& features, const Assignment& a, std::size_t k) {
  const std::size_t d = features.cols();
  Codebook next{Matrix(k, d)};
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const std::uint32_t c = a.index.indices[i];
    ++counts[c];
    auto dst = next.codes.row(c);
    const auto src = features.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }
  std::vector<double> remaining = a.distance;
  for (std::size_t c = 0; c < k; ++c) {
    auto code = next.codes.row(c);
    if (counts[c] > 0) {
      const double inv = static_cast<double>(counts[c]);
      for (double& v : code) v /= inv;
      continue;
    }
    const auto far = static_cast<std::size_t>(
        std::distance(remaining.begin(), std::max_element(remaining.begin(), remaining.end())));
    const auto src = features.row(far);
    std::copy(src.begin(), src.end(), code.begin());
    remaining[far] = -1.0;
  }
  return next;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

/// Hartigan single-point transfers on a partition: moves sample i from cluster a
/// to b whenever n_b / (n_b + 1) * |x - m_b|^2 < n_a / (n_a - 1) * |x - m_a|^2,
/// which strictly lowers the objective. Returns whether any sample moved.
bool hartigan_transfers(const Matrix& features, IndexAssignment& labels, std::size_t k, std::size_t max_passes) {
  constexpr double kMargin = 1e-12;
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  Matrix sums(k, d);
  Matrix means(k, d);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t c = labels.indices[i];
    ++counts[c];
    auto dst = sums.row(c);
    const auto src = features.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }
  const auto refresh = [&](std::size_t c) {
    auto m = means.row(c);
    const auto s = sums.row(c);
    for (std::size_t j = 0; j < d; ++j) m[j] = counts[c] > 0 ? s[j] / static_cast<double>(counts[c]) : 0.0;
  };
  for (std::size_t c = 0; c < k; ++c) refresh(c);

  bool moved_any = false;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t a = labels.indices[i];
      if (counts[a] <= 1) continue;
      const auto x = features.row(i);
      const double na = static_cast<double>(counts[a]);
      const double leave = na / (na - 1.0) * squared_distance(x, means.row(a));
      std::size_t best = a;
      double best_cost = leave * (1.0 - kMargin);
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a || counts[b] == 0) continue;
        const double nb = static_cast<double>(counts[b]);
        const double join = nb / (nb + 1.0) * squared_distance(x, means.row(b));
        if (join < best_cost) {
          best_cost = join;
          best = b;
        }
      }
      if (best == a) continue;
      auto from = sums.row(a);
      auto to = sums.row(best);
      for (std::size_t j = 0; j < d; ++j) {
        from[j] -= x[j];
        to[j] += x[j];
      }
      --counts[a];
      ++counts[best];
      refresh(a);
      refresh(best);
      labels.indices[i] = static_cast<std::uint32_t>(best);
      moved = true;
    }
    if (!moved) break;
    moved_any = true;
  }
  return moved_any;
}

}  // namespace

Codebook kmeans_plus_plus(const Matrix& features, std::size_t k, std::uint64_t seed) {
  validate_features(features, k);
  const std::size_t n = features.rows();
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(n, false);
  taken[chosen[0]] = true;
  while (chosen.size() < k) {
    const auto last = features.row(chosen.back());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = features.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - last[j];
        s += diff * diff;
      }
      d2[i] = std::min(d2[i], s);
      if (!taken[i]) total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > r) break;
      }
    }
    if (pick == n) {
      // Every remaining sample duplicates a chosen code; pick uniformly among them.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    taken[pick] = true;
    chosen.push_back(pick);
  }
  return Codebook{features.gather_rows(chosen)};
}

KMeansResult kmeans_fit_from(const Matrix& features, Codebook initial, const KMeansOptions& options) {
  validate_features(features, options.k);
  if (initial.size() != options.k || initial.dim() != features.cols()) {
    throw ShapeError("initial codebook shape does not match K and feature dim");
  }
  KMeansResult result;
  result.codebook = std::move(initial);
  Assignment current = assign_with_distances(result.codebook, features);
  result.objective_trace.push_back(current.objective);

  for (std::size_t round = 0; round < std::max<std::size_t>(1, options.max_iters); ++round) {
    for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
      const double previous = current.objective;
      if (previous == 0.0) break;
      result.codebook = update_centroids(features, current, options.k);
      current = assign_with_distances(result.codebook, features);
      result.objective_trace.push_back(current.objective);
      ++result.iterations;
      if (previous - current.objective <= options.tol * previous) break;
    }
    if (current.objective == 0.0) break;
    if (!hartigan_transfers(features, current.index, options.k, options.max_iters)) break;
    result.codebook = update_centroids(features, current, options.k);
    current = assign_with_distances(result.codebook, features);
    result.objective_trace.push_back(current.objective);
  }
  result.assignment = std::move(current.index);
  result.objective = current.objective;
  return result;
}

KMeansResult kmeans_fit(const Matrix& features, const KMeansOptions& options) {
  validate_features(features, options.k);
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  KMeansResult best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Codebook init = kmeans_plus_plus(features, options.k, derive_seed(options.seed, "kmeans++", {r}));
    KMeansResult run = kmeans_fit_from(features, std::move(init), options);
    if (r == 0 || run.objective < best.objective) best = std::move(run);
    if (best.objective == 0.0) break;
  }
  return best;
}

std::size_t assign_nearest(const Codebook& codebook, std::span<const double> feature) {
  if (feature.size() != codebook.dim()) {
    throw ShapeError("assign_nearest: feature dim " + std::to_string(feature.size()) + " vs codebook dim " +
                     std::to_string(codebook.dim()));
  }
  if (codebook.size() == 0) throw ConfigError("empty codebook", "K");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < codebook.size(); ++c) {
    const auto code = codebook.codes.row(c);
    double s = 0.0;
    for (std::size_t j = 0; j < feature.size(); ++j) {
      const double diff = feature[j] - code[j];
      s += diff * diff;
    }
    if (s < best_d) {
      best_d = s;
      best = c;
    }
  }
  return best;
}

IndexAssignment assign_all(const Codebook& codebook, const Matrix& features) {
  if (features.cols() != codebook.dim()) throw ShapeError("assign_all: feature dim does not match codebook");
  if (codebook.size() == 0) throw ConfigError("empty codebook", "K");
  return assign_with_distances(codebook, features).index;
}

double kmeans_objective(const Codebook& codebook, const Matrix& features, const IndexAssignment& assignment) {
  if (assignment.size() != features.rows()) throw ShapeError("assignment length does not match sample count");
  if (features.cols() != codebook.dim()) throw ShapeError("feature dim does not match codebook");
  double total = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const std::uint32_t c = assignment.indices[i];
    if (c >= codebook.size()) {
      throw IndexError("code index " + std::to_string(c) + " outside [0, " + std::to_string(codebook.size()) + ")");
    }
    const auto x = features.row(i);
    const auto code = codebook.codes.row(c);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - code[j];
      s += diff * diff;
    }
    total += s;
  }
  return total;
}

}  // namespace decor
