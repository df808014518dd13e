// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decor/data.hpp"
#include "decor/objectives.hpp"
#include "decor/probe.hpp"

namespace decor {

enum class Method { kFinetune, kDecor, kLwf, kSimclr, kSimclrDecor, kSimclrLwf };

std::string_view to_string(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;
bool uses_codebook(Method method) noexcept;
bool uses_teacher(Method method) noexcept;
bool is_contrastive(Method method) noexcept;

/// Everything a run needs. Defaults are the desk-scale benchmark.
struct ExperimentConfig {
  Method method = Method::kFinetune;
  std::size_t tasks = 5;

  // Index-prediction regularizer.
  std::size_t codebook_size = 32;
  std::size_t predictor_layers = 2;
  std::size_t predictor_hidden = 128;
  double lambda = 0.2;

  // Teacher-snapshot baseline.
  double lwf_lambda = 1.0;
  double lwf_temperature = 2.0;

  // Contrastive objective.
  double nt_xent_temperature = 0.5;

  // Model shapes.
  std::vector<std::size_t> encoder_hidden{64};
  std::size_t feature_dim = 8;
  std::size_t projector_hidden = 128;
  std::size_t projector_dim = 64;

  // Optimization.
  std::size_t epochs_per_task = 20;
  double lr = 0.02;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::size_t batch_size = 32;

  AugmentationConfig augment{0.5, 0.1, 0};
  /// probe.mode selects the protocol reported in the flat CSV; both LEP and
  /// SLEP are always evaluated and kept in the JSON record.
  ProbeConfig probe;

  // K-means at task boundaries.
  std::size_t kmeans_max_iters = 100;
  double kmeans_tol = 1e-6;
  std::size_t kmeans_restarts = 10;

  // Data source: synthetic unless feature_file is set.
  SyntheticConfig synthetic;
  std::optional<std::filesystem::path> feature_file;

  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir = "results";

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

}  // namespace decor
