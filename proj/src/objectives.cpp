// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <string>

#include "decor/errors.hpp"
#include "decor/rng.hpp"

namespace decor {

// ---------------------------------------------------------------------------
// Augmentation

void AugmentationConfig::validate() const {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("must be >= 0", "augment.noise_sigma");
  if (!(mask_fraction >= 0.0 && mask_fraction <= 1.0)) throw ConfigError("must lie in [0, 1]", "augment.mask_fraction");
}

std::size_t AugmentationConfig::masked_count(std::size_t dim) const noexcept {
  return static_cast<std::size_t>(std::lround(mask_fraction * static_cast<double>(dim)));
}

namespace {

Matrix augment_with(const Matrix& batch, const AugmentationConfig& cfg, Rng& rng) {
  Matrix out = batch;
  const std::size_t dim = batch.cols();
  const std::size_t masked = std::min(cfg.masked_count(dim), dim);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::size_t> coords(dim);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    if (cfg.noise_sigma > 0.0) {
      for (double& v : row) v += cfg.noise_sigma * noise(rng);
    }
    if (masked > 0) {
      std::iota(coords.begin(), coords.end(), 0);
      for (std::size_t i = 0; i < masked; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(i, dim - 1)(rng);
        std::swap(coords[i], coords[j]);
        row[coords[i]] = 0.0;
      }
    }
  }
  return out;
}

}  // namespace

Matrix augment(const Matrix& batch, const AugmentationConfig& cfg) {
  cfg.validate();
  if (cfg.identity()) return batch;
  Rng rng(cfg.seed);
  return augment_with(batch, cfg, rng);
}

std::pair<Matrix, Matrix> augment_two_views(const Matrix& batch, const AugmentationConfig& cfg) {
  cfg.validate();
  if (cfg.identity()) return {batch, batch};
  Rng rng(cfg.seed);
  Matrix a = augment_with(batch, cfg, rng);
  Matrix b = augment_with(batch, cfg, rng);
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Supervised

nn::BatchLoss supervised_ce_loss(const Matrix& head_logits, std::span<const std::size_t> labels,
                                 std::span<const std::size_t> active) {
  return nn::mean_cross_entropy(head_logits, labels, active);
}

// ---------------------------------------------------------------------------
// NT-Xent

PairLoss nt_xent_loss(const Matrix& projections_a, const Matrix& projections_b, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("must be positive", "nt_xent_temperature");
  if (projections_a.rows() != projections_b.rows() || projections_a.cols() != projections_b.cols()) {
    throw ShapeError("nt_xent_loss: views differ in shape");
  }
  const std::size_t n = projections_a.rows();
  if (n < 2) throw ConfigError("NT-Xent needs at least two pairs (no negatives otherwise)", "batch_size");
  const std::size_t m = 2 * n;
  const std::size_t d = projections_a.cols();

  const Matrix z = vstack(projections_a, projections_b);
  if (!all_finite(z.values())) throw NumericError("nt_xent_loss on non-finite projections");
  Matrix u(m, d);
  std::vector<double> norm(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (double v : z.row(i)) s += v * v;
    norm[i] = std::max(std::sqrt(s), 1e-12);
    for (std::size_t j = 0; j < d; ++j) u(i, j) = z(i, j) / norm[i];
  }

  Matrix sim(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i; k < m; ++k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += u(i, j) * u(k, j);
      sim(i, k) = sim(k, i) = dot / temperature;
    }
  }

  // g(i, k) = d loss / d sim(i, k) contributed by anchor i.
  const double inv_m = 1.0 / static_cast<double>(m);
  Matrix g(m, m);
  double total = 0.0;
  std::vector<double> others;
  others.reserve(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t pos = i < n ? i + n : i - n;
    others.clear();
    for (std::size_t k = 0; k < m; ++k) {
      if (k != i) others.push_back(sim(i, k));
    }
    const double lse = nn::log_sum_exp(others);
    total += lse - sim(i, pos);
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      g(i, k) = std::exp(sim(i, k) - lse) * inv_m;
    }
    g(i, pos) -= inv_m;
  }

  PairLoss out{total * inv_m, Matrix(n, d), Matrix(n, d)};
  std::vector<double> du(d);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(du.begin(), du.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      const double w = (g(i, k) + g(k, i)) / temperature;
      for (std::size_t j = 0; j < d; ++j) du[j] += w * u(k, j);
    }
    double radial = 0.0;
    for (std::size_t j = 0; j < d; ++j) radial += u(i, j) * du[j];
    auto dst = i < n ? out.grad_a.row(i) : out.grad_b.row(i - n);
    for (std::size_t j = 0; j < d; ++j) dst[j] = (du[j] - u(i, j) * radial) / norm[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Teacher distillation

TeacherSnapshot::TeacherSnapshot(nn::Network encoder, nn::Network head, double temperature,
                                 std::vector<std::size_t> outputs)
    : encoder_(std::move(encoder)), head_(std::move(head)), temperature_(temperature), outputs_(std::move(outputs)) {
  if (!(temperature_ > 0.0)) throw ConfigError("must be positive", "lwf_temperature");
  if (encoder_.empty() || head_.empty()) throw ShapeError("teacher needs an encoder and a head");
  if (encoder_.output_dim() != head_.input_dim()) throw ShapeError("teacher head does not fit encoder output");
  for (std::size_t o : outputs_) {
    if (o >= head_.output_dim()) throw IndexError("teacher output column out of range");
  }
}

std::size_t TeacherSnapshot::output_dim() const noexcept {
  return outputs_.empty() ? head_.output_dim() : outputs_.size();
}

Matrix TeacherSnapshot::logits(const Matrix& batch) const {
  Matrix full = nn::forward(head_, nn::forward(encoder_, batch));
  if (outputs_.empty()) return full;
  Matrix out(full.rows(), outputs_.size());
  for (std::size_t r = 0; r < full.rows(); ++r) {
    for (std::size_t c = 0; c < outputs_.size(); ++c) out(r, c) = full(r, outputs_[c]);
  }
  return out;
}

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(v));
  put_le(out, bits);
}

void put_network(std::vector<std::uint8_t>& out, const nn::Network& net) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.depth()));
  for (const nn::Layer& layer : net.layers()) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.params.out_dim()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.params.in_dim()));
    out.push_back(layer.activation == nn::Activation::kRelu ? 1 : 0);
    for (double w : layer.params.weights.values()) put_f64(out, w);
    for (double b : layer.params.bias) put_f64(out, b);
  }
}

}  // namespace

std::vector<std::uint8_t> TeacherSnapshot::serialize() const {
  std::vector<std::uint8_t> out{'D', 'C', 'R', 'T'};
  put_le<std::uint16_t>(out, 1);
  put_f64(out, temperature_);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(outputs_.size()));
  for (std::size_t o : outputs_) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(o));
  put_network(out, encoder_);
  put_network(out, head_);
  return out;
}

std::size_t TeacherSnapshot::serialized_bytes() const { return serialize().size(); }

nn::BatchLoss kl_distill_loss(const Matrix& teacher_logits, const Matrix& student_logits, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("must be positive", "lwf_temperature");
  if (teacher_logits.rows() != student_logits.rows() || teacher_logits.cols() != student_logits.cols()) {
    throw ShapeError("distillation: teacher emits " + std::to_string(teacher_logits.cols()) + " outputs, student " +
                     std::to_string(student_logits.cols()));
  }
  if (student_logits.rows() == 0) throw ShapeError("distillation on an empty batch");
  const std::size_t n = student_logits.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  nn::BatchLoss out{0.0, Matrix(n, student_logits.cols())};
  std::vector<double> ts(student_logits.cols()), ss(student_logits.cols());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < ts.size(); ++c) {
      ts[c] = teacher_logits(r, c) / temperature;
      ss[c] = student_logits(r, c) / temperature;
    }
    const double t_lse = nn::log_sum_exp(ts);
    const double s_lse = nn::log_sum_exp(ss);
    double kl = 0.0;
    for (std::size_t c = 0; c < ts.size(); ++c) {
      const double log_pt = ts[c] - t_lse;
      const double log_ps = ss[c] - s_lse;
      const double pt = std::exp(log_pt);
      if (pt > 0.0) kl += pt * (log_pt - log_ps);
      out.grad(r, c) = (std::exp(log_ps) - pt) / temperature * inv_n;
    }
    out.value += kl;
  }
  out.value *= inv_n;
  return out;
}

nn::BatchLoss lwf_distill_loss(const TeacherSnapshot& teacher, const Matrix& student_logits, const Matrix& batch) {
  if (teacher.output_dim() != student_logits.cols()) {
    throw ShapeError("distillation: teacher emits " + std::to_string(teacher.output_dim()) + " outputs, student " +
                     std::to_string(student_logits.cols()));
  }
  return kl_distill_loss(teacher.logits(batch), student_logits, teacher.temperature());
}

}  // namespace decor
