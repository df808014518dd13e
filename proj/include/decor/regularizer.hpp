// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "decor/data.hpp"
#include "decor/kmeans.hpp"
#include "decor/nn.hpp"

// Delayed codebook regularizer.
//
// At a task boundary the frozen encoder embeds the incoming task's inputs, those
// embeddings are clustered with K-means, and only the nearest-code index of each
// sample is kept (the codebook is dropped). While training on that task, a fresh
// index predictor on top of the encoder learns to recover the stored indices.

namespace decor {

/// Index predictor head. layers == 1 is a single linear map; each extra layer
/// inserts a rectifier hidden layer of width hidden_dim.
struct PredictorConfig {
  std::size_t layers = 2;
  std::size_t hidden_dim = 128;
  std::size_t codebook_size = 32;

  void validate() const;
};

/// Pseudo-labels for one task: the code index of each sample id. Inactive
/// (default-constructed) during the first task. Holds no code vectors.
class DecorState {
 public:
  DecorState() = default;
  /// Throws ConfigError when K < 2, ShapeError on length mismatch, IndexError on
  /// an index >= K and LookupError on duplicate ids.
  DecorState(std::size_t codebook_size, std::vector<SampleId> sample_ids, std::vector<std::uint32_t> indices);

  bool active() const noexcept { return codebook_size_ != 0; }
  std::size_t codebook_size() const noexcept { return codebook_size_; }
  std::size_t size() const noexcept { return indices_.size(); }
  std::span<const SampleId> sample_ids() const noexcept { return sample_ids_; }
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }

  /// Throws LookupError for an unknown id.
  std::uint32_t index_for(SampleId id) const;

  /// Binary record:
  ///   offset 0  char[4] magic "DCRS"
  ///   offset 4  u16     format version (1)
  ///   offset 6  u8      bits per index b = ceil(log2 K)
  ///   offset 7  u8      reserved (0)
  ///   offset 8  u32     K
  ///   offset 12 u64     N
  ///   offset 20 payload ceil(N * b / 8) bytes
  /// Integers are little-endian. Index i occupies payload bits [i*b, (i+1)*b),
  /// least significant bit first. Sample ids are not stored: the record is
  /// aligned with the task's sample order.
  std::vector<std::uint8_t> serialize() const;

  /// Inverse of serialize. `sample_ids` gives the task's sample order and must
  /// have N entries. Throws ParseError on a malformed record.
  static DecorState deserialize(std::span<const std::uint8_t> bytes, std::span<const SampleId> sample_ids);

  static constexpr std::size_t kHeaderBytes = 20;

  friend bool operator==(const DecorState& a, const DecorState& b) {
    return a.codebook_size_ == b.codebook_size_ && a.sample_ids_ == b.sample_ids_ && a.indices_ == b.indices_;
  }

 private:
  std::size_t codebook_size_ = 0;
  std::vector<SampleId> sample_ids_;
  std::vector<std::uint32_t> indices_;
  std::unordered_map<SampleId, std::size_t> position_;
};

struct IncrementOptions {
  std::size_t codebook_size = 32;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  double tol = 1e-6;
  std::size_t restarts = 10;
};

/// Boundary step: embeds `inputs` with the frozen encoder in a single pass,
/// clusters the embeddings and keeps only the indices. The encoder is taken by
/// const reference and never differentiated. Inputs must not be augmented.
/// Throws ConfigError when there are fewer samples than codes.
DecorState increment(const nn::Network& encoder, const Matrix& inputs, std::span<const SampleId> sample_ids,
                     const IncrementOptions& options);

/// Fresh predictor mapping in_dim features to K logits.
nn::Network init_index_predictor(const PredictorConfig& cfg, std::size_t in_dim, std::uint64_t seed);

/// Mean cross-entropy between predictor logits and the stored indices of
/// `sample_ids`. The gradient is with respect to the logits. There is no
/// parameter for any earlier model: the stored indices are the only teacher.
/// Throws StateError when the state is inactive, ShapeError when the logit
/// width differs from K and LookupError for unknown ids.
nn::BatchLoss distill_loss(const Matrix& predictor_logits, const DecorState& state,
                           std::span<const SampleId> sample_ids);

/// ce on the first task, ce + lambda * pd afterwards.
double combined_loss_supervised(double ce, double pd, double lambda, bool first_task);
/// ssl on the first task, ssl + lambda * pd afterwards.
double combined_loss_ssl(double ssl, double pd, double lambda, bool first_task);

/// Bits needed to keep one index per sample: packed uses ceil(log2 K) bits each,
/// unpacked a 32-bit integer each. Throws ConfigError when K < 2.
std::uint64_t storage_bits(std::uint64_t num_samples, std::size_t codebook_size, bool packed);

/// ceil(log2 K) for K >= 2.
unsigned bits_per_index(std::size_t codebook_size);

}  // namespace decor
