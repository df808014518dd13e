// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "decor/matrix.hpp"
#include "decor/nn.hpp"

// Training objectives shared by every method: supervised cross-entropy, the
// two-view contrastive loss with its feature-space augmentation, and the
// teacher-snapshot distillation baseline.

namespace decor {

/// Feature-space stand-in for spectrogram augmentation: additive Gaussian noise
/// followed by zeroing a random subset of coordinates in every row.
struct AugmentationConfig {
  double noise_sigma = 0.0;
  double mask_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Coordinates zeroed per row: lround(mask_fraction * dim), half away from zero.
  std::size_t masked_count(std::size_t dim) const noexcept;
  bool identity() const noexcept { return noise_sigma == 0.0 && mask_fraction == 0.0; }
};

/// One augmented copy of `batch`, drawn from a generator seeded with cfg.seed.
Matrix augment(const Matrix& batch, const AugmentationConfig& cfg);

/// Two independent augmented copies. Both come from one generator seeded with
/// cfg.seed (view a first), so the pair is reproducible.
std::pair<Matrix, Matrix> augment_two_views(const Matrix& batch, const AugmentationConfig& cfg);

/// Mean cross-entropy of classifier logits against global labels. `active`
/// optionally restricts the softmax to a class subset.
nn::BatchLoss supervised_ce_loss(const Matrix& head_logits, std::span<const std::size_t> labels,
                                 std::span<const std::size_t> active = {});

struct PairLoss {
  double value = 0.0;
  Matrix grad_a;
  Matrix grad_b;
};

/// Normalized-temperature cross-entropy over cosine similarities. Row i of `a`
/// and row i of `b` are positives; all other rows of both views are negatives.
/// Averaged over all 2N anchors. Throws ConfigError for fewer than two pairs or a
/// non-positive temperature, ShapeError when the views differ in shape.
PairLoss nt_xent_loss(const Matrix& projections_a, const Matrix& projections_b, double temperature);

/// Frozen copy of an encoder and head used by the distillation baseline. Only
/// the output columns listed in `outputs` are distilled (empty = all).
class TeacherSnapshot {
 public:
  TeacherSnapshot(nn::Network encoder, nn::Network head, double temperature, std::vector<std::size_t> outputs = {});

  const nn::Network& encoder() const noexcept { return encoder_; }
  const nn::Network& head() const noexcept { return head_; }
  double temperature() const noexcept { return temperature_; }
  std::span<const std::size_t> outputs() const noexcept { return outputs_; }
  std::size_t output_dim() const noexcept;

  /// Teacher logits restricted to `outputs`.
  Matrix logits(const Matrix& batch) const;

  /// Binary snapshot: magic "DCRT", temperature, output subset, then both
  /// networks as shapes + float64 parameters. Its length is the baseline's
  /// storage cost.
  std::vector<std::uint8_t> serialize() const;
  std::size_t serialized_bytes() const;

 private:
  nn::Network encoder_;
  nn::Network head_;
  double temperature_;
  std::vector<std::size_t> outputs_;
};

/// Mean over rows of KL(softmax(teacher / T) || softmax(student / T)); gradient
/// with respect to the student logits only.
nn::BatchLoss kl_distill_loss(const Matrix& teacher_logits, const Matrix& student_logits, double temperature);

/// kl_distill_loss against the teacher's logits on `batch`.
nn::BatchLoss lwf_distill_loss(const TeacherSnapshot& teacher, const Matrix& student_logits, const Matrix& batch);

}  // namespace decor
