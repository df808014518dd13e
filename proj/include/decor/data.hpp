// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "decor/matrix.hpp"

namespace decor {

using SampleId = std::uint64_t;

enum class Split : std::uint8_t { kTrain, kTest };

/// Labeled feature vectors of one task. Rows of `samples`, `labels`,
/// `sample_ids` and `splits` are aligned.
struct TaskDataset {
  std::size_t task_id = 0;
  Matrix samples;
  std::vector<std::size_t> labels;
  std::vector<SampleId> sample_ids;
  std::vector<Split> splits;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_dim() const noexcept { return samples.cols(); }

  /// Sorted distinct labels.
  std::vector<std::size_t> class_set() const;
  /// Rows selected by position, in order.
  TaskDataset select(std::span<const std::size_t> rows) const;
  /// Rows tagged with `split`, in original order.
  TaskDataset only(Split split) const;

  /// Throws ValidationError on misaligned columns or labels >= num_classes.
  void validate(std::size_t num_classes) const;

  friend bool operator==(const TaskDataset&, const TaskDataset&) = default;
};

/// Throws ValidationError when class sets overlap or sample ids repeat across tasks.
void validate_sequence(std::span<const TaskDataset> tasks, std::size_t num_classes);

struct SyntheticConfig {
  std::size_t num_classes = 10;
  std::size_t feature_dim = 64;
  std::size_t samples_per_class = 200;
  double class_separation = 6.0;
  double within_class_sigma = 1.5;
  double drift_sigma = 2.0;
  std::uint64_t seed = 0;
  /// Fraction of each class held out for probe evaluation.
  double test_fraction = 0.2;

  void validate() const;
};

/// Random permutation of the classes cut into T equal disjoint sets (each sorted).
/// Throws ConfigError unless num_classes is a positive multiple of T.
std::vector<std::vector<std::size_t>> split_classes_into_tasks(std::size_t num_classes, std::size_t tasks,
                                                               std::uint64_t seed);

/// Class-incremental Gaussian benchmark.
///
/// Class means are drawn uniformly on the sphere of radius `class_separation`.
/// Task t adds its own offset vector to the means of its classes, with i.i.d.
/// N(0, drift_sigma^2 / feature_dim) coordinates so its expected norm is about
/// drift_sigma. Samples are mean + N(0, within_class_sigma^2 I). Within each
/// class, a seeded shuffle assigns round(test_fraction * n) samples to the test
/// split. Sample ids are unique over the whole sequence.
std::vector<TaskDataset> generate_synthetic_tasks(const SyntheticConfig& cfg, std::size_t tasks);

struct FeatureFile {
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<TaskDataset> tasks;
};

/// Reads the text format
///   #decor-features v1 num_classes=<n> feature_dim=<d>
///   task_id,sample_id,split,label,f1,...,fd
/// Tasks are returned in ascending task_id order, rows in file order.
/// Throws ParseError (with line number) for malformed content and
/// ValidationError for dataset invariant violations.
FeatureFile load_feature_file(const std::filesystem::path& path);
FeatureFile parse_feature_text(const std::string& text);

/// Writes the same format with round-trip exact floating point.
void save_feature_file(const std::filesystem::path& path, std::span<const TaskDataset> tasks,
                       std::size_t num_classes);
std::string format_feature_text(std::span<const TaskDataset> tasks, std::size_t num_classes);

}  // namespace decor
