// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decor/data.hpp"
#include "decor/experiment.hpp"
#include "decor/regularizer.hpp"

namespace decor {

/// A[t][j] for 1 <= j <= t <= T, in percent. Each entry is written once.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(std::size_t tasks);

  std::size_t tasks() const noexcept { return tasks_; }

  /// 1-based indices. Throws IndexError outside the lower triangle or outside
  /// [0, 100], StateError when the entry was already written.
  void set(std::size_t t, std::size_t j, double accuracy);
  /// Throws StateError when the entry is missing.
  double at(std::size_t t, std::size_t j) const;
  bool has(std::size_t t, std::size_t j) const noexcept;
  bool row_complete(std::size_t t) const noexcept;

  /// Row t (entries 1..t); requires a complete row.
  std::vector<double> row(std::size_t t) const;

  friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;

 private:
  std::size_t offset(std::size_t t, std::size_t j) const;

  std::size_t tasks_ = 0;
  std::vector<double> values_;
  std::vector<bool> written_;
};

/// (1/t) sum_{j<=t} A[t][j]. Throws StateError for an incomplete row.
double average_accuracy(const AccuracyMatrix& a, std::size_t t);

/// (1/(t-1)) sum_{j<t} max_{tau<=t} (A[tau][j] - A[t][j]); 0 for t == 1.
/// Throws StateError when any row 1..t is incomplete.
double max_forgetting(const AccuracyMatrix& a, std::size_t t);

/// Accuracy matrix of one evaluation protocol with its A_t and F_t series.
struct ProtocolResult {
  AccuracyMatrix matrix;
  std::vector<double> average;     // A_t, t = 1..T
  std::vector<double> forgetting;  // F_t, t = 1..T
};

struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  Method method = Method::kFinetune;
  std::size_t tasks = 0;
  std::size_t codebook_size = 0;
  std::size_t predictor_layers = 0;
  double lambda = 0.0;

  ProtocolResult lep;
  ProtocolResult slep;
  /// Which of lep/slep the flat CSV reports.
  ProbeMode primary = ProbeMode::kLep;

  /// Extra storage held while training task t: packed index bits for the
  /// codebook regularizer, 8 x snapshot bytes for the teacher baseline.
  std::vector<std::uint64_t> storage_bits;
  /// Serialized DecorState record size per task (0 when none).
  std::vector<std::uint64_t> decor_state_bytes;
  /// Serialized teacher snapshot size per task (0 when none).
  std::vector<std::uint64_t> teacher_bytes;
  /// Mean training objective per task.
  std::vector<double> train_loss;
  /// Mean unweighted index-prediction loss per task (0 when not used).
  std::vector<double> distill_loss;
  std::size_t decor_states = 0;
  /// Ordered log: "train:t", "increment:t", "update:t" (first update), "evaluate:t".
  std::vector<std::string> events;

  double wall_ms = 0.0;

  const ProtocolResult& primary_result() const noexcept { return primary == ProbeMode::kLep ? lep : slep; }
};

/// Throws StateError unless every "increment:t" precedes the first "update:t".
void verify_event_order(const RunRecord& record);

/// Trains on the task sequence with cfg.method, evaluating LEP and SLEP after
/// every task. With a codebook method, the state used in task t+1 comes from
/// encoding task t+1's training inputs with the encoder at the end of task t.
/// Throws ConfigError for an invalid config or overlapping class sets.
RunRecord run_sequence(const ExperimentConfig& cfg, std::span<const TaskDataset> tasks, std::size_t num_classes,
                       std::uint64_t seed);

/// Builds the task sequence for `seed` (synthetic with a derived data seed, or
/// the configured feature file) and runs it.
RunRecord run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

struct SweepGrid {
  std::vector<std::size_t> codebook_sizes{8, 16, 32, 64};
  std::vector<std::size_t> predictor_layers{1, 2, 3};
};

/// One run per (K, L, seed), K-major then L then seed. Throws ConfigError for
/// an empty grid or invalid values. `jobs` > 1 runs points on worker threads;
/// the result order does not depend on it.
std::vector<RunRecord> sweep(const ExperimentConfig& base, const SweepGrid& grid, std::size_t jobs = 1);

}  // namespace decor
