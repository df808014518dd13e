// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "decor/data.hpp"
#include "decor/matrix.hpp"
#include "decor/nn.hpp"

// Linear evaluation of a frozen encoder: LEP trains one linear classifier on the
// train splits of all seen tasks, SLEP on a fixed-size class-stratified subset of
// each. Accuracy is measured per task on its held-out test split.

namespace decor {

enum class ProbeMode { kLep, kSlep };

struct ProbeConfig {
  ProbeMode mode = ProbeMode::kLep;
  /// SLEP subset size per task.
  std::size_t samples_per_task = 200;
  std::size_t epochs = 50;
  double lr = 0.1;
  std::size_t batch_size = 32;
  /// Z-score features with the probe training set's statistics.
  bool standardize = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Encoder output for every sample. The encoder is only read.
Matrix extract_features(const nn::Network& encoder, const TaskDataset& data);

/// Up to n rows sampled without replacement, stratified by class (quotas as equal
/// as class sizes allow, remainders to the lowest class ids), original row order
/// kept. Returns the whole task when n >= its size.
/// Throws ConfigError for n == 0 or an empty task.
TaskDataset subset_sample(const TaskDataset& data, std::size_t n, std::uint64_t seed);

/// Frozen features of one seen task.
struct ProbeTaskData {
  Matrix train_features;
  std::vector<std::size_t> train_labels;
  Matrix test_features;
  std::vector<std::size_t> test_labels;
};

/// Trains one linear classifier on the union of the tasks' training features
/// (softmax over the classes present) and returns test accuracy in percent per
/// task. Throws StateError when no task is given.
std::vector<double> linear_probe(std::span<const ProbeTaskData> tasks, std::size_t num_classes,
                                 const ProbeConfig& cfg);

/// Extracts features for `seen_tasks` (SLEP subsets drawn per task from
/// cfg.seed) and runs linear_probe.
std::vector<double> evaluate_encoder(const nn::Network& encoder, std::span<const TaskDataset> seen_tasks,
                                     std::size_t num_classes, const ProbeConfig& cfg);

}  // namespace decor
