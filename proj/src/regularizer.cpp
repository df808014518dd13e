// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/regularizer.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "decor/errors.hpp"

namespace decor {

void PredictorConfig::validate() const {
  if (layers < 1) throw ConfigError("index predictor needs at least one layer", "L");
  if (hidden_dim < 1) throw ConfigError("must be positive", "predictor_hidden");
  if (codebook_size < 2) throw ConfigError("codebook size must be at least 2", "K");
}

unsigned bits_per_index(std::size_t codebook_size) {
  if (codebook_size < 2) throw ConfigError("codebook size must be at least 2", "K");
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < codebook_size) ++bits;
  return bits;
}

std::uint64_t storage_bits(std::uint64_t num_samples, std::size_t codebook_size, bool packed) {
  const unsigned per_index = bits_per_index(codebook_size);
  return num_samples * (packed ? per_index : 32u);
}

// ---------------------------------------------------------------------------
// DecorState

DecorState::DecorState(std::size_t codebook_size, std::vector<SampleId> sample_ids, std::vector<std::uint32_t> indices)
    : codebook_size_(codebook_size), sample_ids_(std::move(sample_ids)), indices_(std::move(indices)) {
  if (codebook_size_ < 2) throw ConfigError("codebook size must be at least 2", "K");
  if (codebook_size_ > (std::size_t{1} << 31)) throw ConfigError("codebook size too large", "K");
  if (sample_ids_.size() != indices_.size()) throw ShapeError("DecorState: ids and indices differ in length");
  position_.reserve(sample_ids_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= codebook_size_) {
      throw IndexError("code index " + std::to_string(indices_[i]) + " outside [0, " + std::to_string(codebook_size_) +
                       ")");
    }
    if (!position_.emplace(sample_ids_[i], i).second) {
      throw LookupError("duplicate sample id " + std::to_string(sample_ids_[i]));
    }
  }
}

std::uint32_t DecorState::index_for(SampleId id) const {
  const auto it = position_.find(id);
  if (it == position_.end()) throw LookupError("no stored code index for sample id " + std::to_string(id));
  return indices_[it->second];
}

namespace {

constexpr char kMagic[4] = {'D', 'C', 'R', 'S'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[offset + i]) << (8 * i);
  return value;
}

}  // namespace

std::vector<std::uint8_t> DecorState::serialize() const {
  if (!active()) throw StateError("cannot serialize an inactive DecorState");
  const unsigned b = bits_per_index(codebook_size_);
  const std::uint64_t n = indices_.size();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + (n * b + 7) / 8);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(out, kVersion);
  out.push_back(static_cast<std::uint8_t>(b));
  out.push_back(0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(codebook_size_));
  put_le<std::uint64_t>(out, n);

  std::vector<std::uint8_t> payload((n * b + 7) / 8, 0);
  std::uint64_t bit = 0;
  for (std::uint32_t index : indices_) {
    for (unsigned k = 0; k < b; ++k, ++bit) {
      if ((index >> k) & 1u) payload[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

DecorState DecorState::deserialize(std::span<const std::uint8_t> bytes, std::span<const SampleId> sample_ids) {
  if (bytes.size() < kHeaderBytes) throw ParseError("DecorState record shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw ParseError("DecorState record: bad magic");
  if (get_le<std::uint16_t>(bytes, 4) != kVersion) throw ParseError("DecorState record: unsupported version");
  const unsigned b = bytes[6];
  const std::size_t k = get_le<std::uint32_t>(bytes, 8);
  const std::uint64_t n = get_le<std::uint64_t>(bytes, 12);
  if (k < 2 || b != bits_per_index(k)) throw ParseError("DecorState record: inconsistent K and index width");
  if (bytes.size() != kHeaderBytes + (n * b + 7) / 8) throw ParseError("DecorState record: payload length mismatch");
  if (sample_ids.size() != n) throw ShapeError("DecorState record holds " + std::to_string(n) + " indices for " +
                                               std::to_string(sample_ids.size()) + " samples");
  const auto payload = bytes.subspan(kHeaderBytes);
  std::vector<std::uint32_t> indices(n, 0);
  std::uint64_t bit = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (unsigned j = 0; j < b; ++j, ++bit) {
      if ((payload[bit / 8] >> (bit % 8)) & 1u) indices[i] |= 1u << j;
    }
  }
  try {
    return DecorState(k, std::vector<SampleId>(sample_ids.begin(), sample_ids.end()), std::move(indices));
  } catch (const IndexError& e) {
    throw ParseError(std::string("DecorState record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// INCREMENT / DISTILL

DecorState increment(const nn::Network& encoder, const Matrix& inputs, std::span<const SampleId> sample_ids,
                     const IncrementOptions& options) {
  if (options.codebook_size < 2) throw ConfigError("codebook size must be at least 2", "K");
  if (inputs.rows() != sample_ids.size()) throw ShapeError("increment: one sample id per input row required");
  if (inputs.rows() < options.codebook_size) {
    throw ConfigError("increment needs at least K samples (" + std::to_string(inputs.rows()) + " < " +
                          std::to_string(options.codebook_size) + ")",
                      "K");
  }
  const Matrix features = nn::forward(encoder, inputs);
  KMeansOptions km;
  km.k = options.codebook_size;
  km.seed = options.seed;
  km.max_iters = options.max_iters;
  km.tol = options.tol;
  km.restarts = options.restarts;
  KMeansResult fit = kmeans_fit(features, km);
  return DecorState(options.codebook_size, std::vector<SampleId>(sample_ids.begin(), sample_ids.end()),
                    std::move(fit.assignment.indices));
}

nn::Network init_index_predictor(const PredictorConfig& cfg, std::size_t in_dim, std::uint64_t seed) {
  cfg.validate();
  if (in_dim == 0) throw ConfigError("predictor input dim must be positive", "feature_dim");
  std::vector<std::size_t> dims{in_dim};
  for (std::size_t i = 1; i < cfg.layers; ++i) dims.push_back(cfg.hidden_dim);
  dims.push_back(cfg.codebook_size);
  return nn::Network::init(std::span<const std::size_t>(dims), nn::Activation::kRelu, seed);
}

nn::BatchLoss distill_loss(const Matrix& predictor_logits, const DecorState& state,
                           std::span<const SampleId> sample_ids) {
  if (!state.active()) throw StateError("distill_loss needs an active DecorState");
  if (predictor_logits.cols() != state.codebook_size()) {
    throw ShapeError("predictor emits " + std::to_string(predictor_logits.cols()) + " logits for K = " +
                     std::to_string(state.codebook_size()));
  }
  if (sample_ids.size() != predictor_logits.rows()) throw ShapeError("distill_loss: one sample id per row required");
  std::vector<std::size_t> targets(sample_ids.size());
  for (std::size_t i = 0; i < sample_ids.size(); ++i) targets[i] = state.index_for(sample_ids[i]);
  return nn::mean_cross_entropy(predictor_logits, targets);
}

double combined_loss_supervised(double ce, double pd, double lambda, bool first_task) {
  if (!(lambda >= 0.0)) throw ConfigError("must be non-negative", "lambda");
  return first_task ? ce : ce + lambda * pd;
}

double combined_loss_ssl(double ssl, double pd, double lambda, bool first_task) {
  return combined_loss_supervised(ssl, pd, lambda, first_task);
}

}  // namespace decor
