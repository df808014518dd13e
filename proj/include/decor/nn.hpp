// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "decor/matrix.hpp"

// Minimal dense-network engine: fully connected layers with identity or
// rectifier activations, manual backpropagation, softmax kernels and SGD.
// Everything is double precision and deterministic.

namespace decor::nn {

enum class Activation { kIdentity, kRelu };

/// Parameters of one dense layer: y = W x + b with W stored out x in.
struct DenseParams {
  Matrix weights;
  std::vector<double> bias;

  DenseParams() = default;
  DenseParams(std::size_t out_dim, std::size_t in_dim) : weights(out_dim, in_dim), bias(out_dim, 0.0) {}

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const DenseParams&, const DenseParams&) = default;
};

struct Layer {
  DenseParams params;
  Activation activation = Activation::kIdentity;

  friend bool operator==(const Layer&, const Layer&) = default;
};

class Network {
 public:
  Network() = default;
  /// Throws ShapeError when adjacent layers do not chain or params are non-finite.
  explicit Network(std::vector<Layer> layers);

  /// Glorot-uniform weights (a = sqrt(6 / (fan_in + fan_out))), zero bias.
  /// `dims` = {input, hidden..., output}; hidden layers use `hidden_activation`,
  /// the last layer is linear.
  static Network init(std::span<const std::size_t> dims, Activation hidden_activation, std::uint64_t seed);
  static Network init(std::initializer_list<std::size_t> dims, Activation hidden_activation,
                      std::uint64_t seed);

  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;
  std::size_t depth() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  Layer& layer(std::size_t i) noexcept { return layers_[i]; }
  const Layer& layer(std::size_t i) const noexcept { return layers_[i]; }

  std::size_t parameter_count() const noexcept;
  /// Weight and bias arrays in a fixed order (layer by layer, weights then bias).
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;

  /// FNV-1a over the raw parameter bytes. Used to assert frozen encoders.
  std::uint64_t checksum() const noexcept;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<Layer> layers_;
};

/// Layers of `front` followed by layers of `back`.
Network concat(const Network& front, const Network& back);

/// Gradient arrays congruent with a Network.
class GradientSet {
 public:
  GradientSet() = default;
  static GradientSet zeros_like(const Network& net);

  std::vector<DenseParams>& layers() noexcept { return layers_; }
  const std::vector<DenseParams>& layers() const noexcept { return layers_; }

  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;

  bool congruent_with(const Network& net) const noexcept;
  void set_zero() noexcept;
  void scale(double factor) noexcept;

 private:
  std::vector<DenseParams> layers_;
};

/// Activations recorded by a training forward pass: input and output of every layer.
struct ForwardTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;
};

/// Row-wise forward pass. Throws ShapeError on a column mismatch.
Matrix forward(const Network& net, const Matrix& batch);
Matrix forward(const Network& net, const Matrix& batch, ForwardTrace& trace);

/// Backpropagates `grad_output` (d loss / d output) through `net`, accumulating
/// parameter gradients into `grads`. Returns d loss / d input.
Matrix backward(const Network& net, const ForwardTrace& trace, const Matrix& grad_output, GradientSet& grads);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Softmax cross-entropy for one row of logits. grad = softmax(logits) - onehot(target).
/// Throws IndexError for an out-of-range target and NumericError for non-finite logits.
LossAndGrad softmax_cross_entropy(std::span<const double> logits, std::size_t target);

/// Mean loss over a batch and its gradient with respect to the batch input.
struct BatchLoss {
  double value = 0.0;
  Matrix grad;
};

/// Mean softmax cross-entropy over rows. `active`, when non-empty, restricts the
/// softmax to those columns (others get zero gradient); targets must be active.
BatchLoss mean_cross_entropy(const Matrix& logits, std::span<const std::size_t> targets,
                             std::span<const std::size_t> active = {});

/// Max-subtracted softmax of logits / temperature.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);
double log_sum_exp(std::span<const double> values) noexcept;

/// Returns net with every parameter p replaced by p - lr * g.
Network sgd_step(Network net, const GradientSet& grads, double lr);

/// In-place variant of sgd_step.
void apply_sgd(Network& net, const GradientSet& grads, double lr);

/// SGD with optional momentum and L2 weight decay, holding velocity per network.
class Sgd {
 public:
  struct Options {
    double lr = 0.05;
    double momentum = 0.0;
    double weight_decay = 0.0;
  };

  explicit Sgd(Options options) : options_(options) {}

  /// Updates `net` from `grads`. `grads` is clobbered when weight decay or momentum is on.
  void step(Network& net, GradientSet& grads);
  /// Drops momentum state (e.g. when a head is re-initialized).
  void reset() { velocity_ = {}; }

  const Options& options() const noexcept { return options_; }

 private:
  Options options_;
  GradientSet velocity_;
};

/// Loss evaluated at `net` on `batch`. When `grads` is non-null, the analytic
/// gradient must be accumulated into it.
using LossFn = std::function<double(const Network& net, const Matrix& batch, GradientSet* grads)>;

struct FiniteDifferenceOptions {
  /// Parameters probed; 0 checks every parameter.
  std::size_t max_parameters = 0;
  std::uint64_t seed = 0;
};

/// Max over probed parameters of |analytic - central| / max(|analytic|, |central|, 1e-6).
/// Throws ConfigError unless epsilon is in (0, 1e-2] and NumericError on a non-finite loss.
double finite_difference_check(const Network& net, const LossFn& loss_fn, const Matrix& batch, double epsilon,
                               FiniteDifferenceOptions options = {});

/// Same measure for a scalar function of a matrix, checked against the gradient it reports.
using MatrixFn = std::function<double(const Matrix& x, Matrix* grad)>;
double finite_difference_check(const MatrixFn& fn, const Matrix& at, double epsilon);

}  // namespace decor::nn
