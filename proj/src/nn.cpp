// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <string>

#include "decor/errors.hpp"
#include "decor/kernels.hpp"
#include "decor/rng.hpp"

namespace decor::nn {

namespace {

std::string dims_text(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

void relu_inplace(Matrix& m) noexcept {
  for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Network

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseParams& p = layers_[i].params;
    if (p.bias.size() != p.out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias length " + dims_text(p.bias.size(), p.out_dim()));
    }
    if (p.out_dim() == 0 || p.in_dim() == 0) throw ShapeError("layer " + std::to_string(i) + ": empty layer");
    if (i > 0 && layers_[i - 1].params.out_dim() != p.in_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " input " +
                       dims_text(p.in_dim(), layers_[i - 1].params.out_dim()));
    }
    if (!all_finite(p.weights.values()) || !all_finite(p.bias)) {
      throw NumericError("layer " + std::to_string(i) + ": non-finite parameter");
    }
  }
}

Network Network::init(std::span<const std::size_t> dims, Activation hidden_activation, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("network needs at least input and output dims");
  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i];
    const std::size_t fan_out = dims[i + 1];
    if (fan_in == 0 || fan_out == 0) throw ConfigError("network dims must be positive");
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-a, a);
    Layer layer{DenseParams(fan_out, fan_in),
                i + 2 == dims.size() ? Activation::kIdentity : hidden_activation};
    for (double& w : layer.params.weights.values()) w = dist(rng);
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

Network Network::init(std::initializer_list<std::size_t> dims, Activation hidden_activation, std::uint64_t seed) {
  const std::vector<std::size_t> v(dims);
  return init(std::span<const std::size_t>(v), hidden_activation, seed);
}

std::size_t Network::input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().params.in_dim(); }

std::size_t Network::output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().params.out_dim(); }

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.params.weights.size() + l.params.bias.size();
  return n;
}

std::vector<std::span<double>> Network::parameter_blocks() {
  std::vector<std::span<double>> blocks;
  for (Layer& l : layers_) {
    blocks.emplace_back(l.params.weights.values());
    blocks.emplace_back(l.params.bias);
  }
  return blocks;
}

std::vector<std::span<const double>> Network::parameter_blocks() const {
  std::vector<std::span<const double>> blocks;
  for (const Layer& l : layers_) {
    blocks.emplace_back(l.params.weights.values());
    blocks.emplace_back(l.params.bias);
  }
  return blocks;
}

std::uint64_t Network::checksum() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::span<const double> block : parameter_blocks()) {
    for (double v : block) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

Network concat(const Network& front, const Network& back) {
  std::vector<Layer> layers = front.layers();
  layers.insert(layers.end(), back.layers().begin(), back.layers().end());
  return Network(std::move(layers));
}

// ---------------------------------------------------------------------------
// GradientSet

GradientSet GradientSet::zeros_like(const Network& net) {
  GradientSet g;
  for (const Layer& l : net.layers()) g.layers_.emplace_back(l.params.out_dim(), l.params.in_dim());
  return g;
}

std::vector<std::span<double>> GradientSet::blocks() {
  std::vector<std::span<double>> out;
  for (DenseParams& p : layers_) {
    out.emplace_back(p.weights.values());
    out.emplace_back(p.bias);
  }
  return out;
}

std::vector<std::span<const double>> GradientSet::blocks() const {
  std::vector<std::span<const double>> out;
  for (const DenseParams& p : layers_) {
    out.emplace_back(p.weights.values());
    out.emplace_back(p.bias);
  }
  return out;
}

bool GradientSet::congruent_with(const Network& net) const noexcept {
  if (layers_.size() != net.depth()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseParams& p = net.layer(i).params;
    if (layers_[i].weights.rows() != p.out_dim() || layers_[i].weights.cols() != p.in_dim() ||
        layers_[i].bias.size() != p.bias.size()) {
      return false;
    }
  }
  return true;
}

void GradientSet::set_zero() noexcept {
  for (std::span<double> b : blocks()) std::fill(b.begin(), b.end(), 0.0);
}

void GradientSet::scale(double factor) noexcept {
  for (std::span<double> b : blocks()) {
    for (double& v : b) v *= factor;
  }
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

Matrix dense_forward(const Layer& layer, const Matrix& x) {
  const DenseParams& p = layer.params;
  const std::size_t n = x.rows();
  Matrix y(n, p.out_dim());
  for (std::size_t i = 0; i < n; ++i) std::copy(p.bias.begin(), p.bias.end(), y.row(i).begin());
  const Matrix wt = p.weights.transposed();
  kernels::active().gemm_nn_acc(n, p.out_dim(), p.in_dim(), x.data(), wt.data(), y.data());
  if (layer.activation == Activation::kRelu) relu_inplace(y);
  return y;
}

void check_input(const Network& net, const Matrix& batch) {
  if (net.empty()) throw ShapeError("forward on an empty network");
  if (batch.cols() != net.input_dim()) {
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                     std::to_string(net.input_dim()));
  }
}

}  // namespace

Matrix forward(const Network& net, const Matrix& batch) {
  check_input(net, batch);
  Matrix x = batch;
  for (const Layer& layer : net.layers()) x = dense_forward(layer, x);
  return x;
}

Matrix forward(const Network& net, const Matrix& batch, ForwardTrace& trace) {
  check_input(net, batch);
  trace.inputs.clear();
  trace.outputs.clear();
  trace.inputs.reserve(net.depth());
  trace.outputs.reserve(net.depth());
  const Matrix* x = &batch;
  for (const Layer& layer : net.layers()) {
    trace.inputs.push_back(*x);
    trace.outputs.push_back(dense_forward(layer, *x));
    x = &trace.outputs.back();
  }
  return trace.outputs.back();
}

Matrix backward(const Network& net, const ForwardTrace& trace, const Matrix& grad_output, GradientSet& grads) {
  if (trace.inputs.size() != net.depth() || trace.outputs.size() != net.depth()) {
    throw ShapeError("backward: trace does not match network depth");
  }
  if (!grads.congruent_with(net)) throw ShapeError("backward: gradient set not congruent with network");
  if (grad_output.rows() != trace.outputs.back().rows() || grad_output.cols() != net.output_dim()) {
    throw ShapeError("backward: output gradient shape mismatch");
  }
  const kernels::KernelTable& k = kernels::active();
  Matrix g = grad_output;
  for (std::size_t li = net.depth(); li-- > 0;) {
    const Layer& layer = net.layer(li);
    const DenseParams& p = layer.params;
    const Matrix& x = trace.inputs[li];
    const std::size_t n = x.rows();
    if (layer.activation == Activation::kRelu) {
      const auto out = trace.outputs[li].values();
      auto gv = g.values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = out[i] > 0.0 ? gv[i] : 0.0;
    }
    DenseParams& gp = grads.layers()[li];
    k.gemm_tn_acc(p.out_dim(), p.in_dim(), n, g.data(), x.data(), gp.weights.data());
    for (std::size_t i = 0; i < n; ++i) {
      const auto gi = g.row(i);
      for (std::size_t o = 0; o < p.out_dim(); ++o) gp.bias[o] += gi[o];
    }
    Matrix gx(n, p.in_dim());
    k.gemm_nn_acc(n, p.in_dim(), p.out_dim(), g.data(), p.weights.data(), gx.data());
    g = std::move(gx);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Softmax kernels

double log_sum_exp(std::span<const double> values) noexcept {
  if (values.empty()) return -INFINITY;
  const double m = *std::max_element(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("softmax temperature must be positive");
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  double m = logits[0] / temperature;
  for (double l : logits) m = std::max(m, l / temperature);
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] / temperature - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

LossAndGrad softmax_cross_entropy(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw IndexError("cross-entropy target " + std::to_string(target) + " outside [0, " +
                     std::to_string(logits.size()) + ")");
  }
  if (!all_finite(logits)) throw NumericError("cross-entropy on non-finite logits");
  const double m = *std::max_element(logits.begin(), logits.end());
  LossAndGrad out;
  out.grad.resize(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.grad[i] = std::exp(logits[i] - m);
    s += out.grad[i];
  }
  out.loss = std::log(s) - (logits[target] - m);
  for (double& g : out.grad) g /= s;
  out.grad[target] -= 1.0;
  return out;
}

BatchLoss mean_cross_entropy(const Matrix& logits, std::span<const std::size_t> targets,
                             std::span<const std::size_t> active) {
  if (targets.size() != logits.rows()) throw ShapeError("cross-entropy: target count does not match batch rows");
  if (logits.rows() == 0) throw ShapeError("cross-entropy on an empty batch");
  BatchLoss out{0.0, Matrix(logits.rows(), logits.cols())};
  const double inv_n = 1.0 / static_cast<double>(logits.rows());

  std::vector<std::size_t> position(logits.cols(), logits.cols());
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i] >= logits.cols()) throw IndexError("active class outside logit range");
    position[active[i]] = i;
  }
  std::vector<double> sub(active.size());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    auto grad = out.grad.row(r);
    if (active.empty()) {
      const LossAndGrad lg = softmax_cross_entropy(row, targets[r]);
      out.value += lg.loss;
      for (std::size_t c = 0; c < row.size(); ++c) grad[c] = lg.grad[c] * inv_n;
      continue;
    }
    if (targets[r] >= logits.cols() || position[targets[r]] == logits.cols()) {
      throw IndexError("cross-entropy target " + std::to_string(targets[r]) + " is not an active class");
    }
    for (std::size_t i = 0; i < active.size(); ++i) sub[i] = row[active[i]];
    const LossAndGrad lg = softmax_cross_entropy(sub, position[targets[r]]);
    out.value += lg.loss;
    for (std::size_t i = 0; i < active.size(); ++i) grad[active[i]] = lg.grad[i] * inv_n;
  }
  out.value *= inv_n;
  return out;
}

// ---------------------------------------------------------------------------
// Optimizers

void apply_sgd(Network& net, const GradientSet& grads, double lr) {
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be non-negative", "lr");
  if (!grads.congruent_with(net)) throw ShapeError("sgd_step: gradient set not congruent with network");
  const kernels::KernelTable& k = kernels::active();
  auto params = net.parameter_blocks();
  const auto g = grads.blocks();
  for (std::size_t b = 0; b < params.size(); ++b) k.axpy(params[b].size(), -lr, g[b].data(), params[b].data());
}

Network sgd_step(Network net, const GradientSet& grads, double lr) {
  apply_sgd(net, grads, lr);
  return net;
}

void Sgd::step(Network& net, GradientSet& grads) {
  const kernels::KernelTable& k = kernels::active();
  if (options_.weight_decay != 0.0) {
    auto params = net.parameter_blocks();
    auto g = grads.blocks();
    for (std::size_t b = 0; b < params.size(); ++b) {
      k.axpy(g[b].size(), options_.weight_decay, params[b].data(), g[b].data());
    }
  }
  if (options_.momentum != 0.0) {
    if (!velocity_.congruent_with(net)) velocity_ = GradientSet::zeros_like(net);
    auto v = velocity_.blocks();
    auto g = grads.blocks();
    for (std::size_t b = 0; b < v.size(); ++b) {
      for (std::size_t i = 0; i < v[b].size(); ++i) v[b][i] = options_.momentum * v[b][i] + g[b][i];
    }
    apply_sgd(net, velocity_, options_.lr);
    return;
  }
  apply_sgd(net, grads, options_.lr);
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2)) throw ConfigError("epsilon must lie in (0, 1e-2]", "epsilon");
}

double finite_or_throw(double v) {
  if (!std::isfinite(v)) throw NumericError("finite-difference check: non-finite loss");
  return v;
}

// Entries where both values are below kGradFloor are compared in absolute terms,
// since central differences there are dominated by rounding.
constexpr double kGradFloor = 1e-6;

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({kGradFloor, std::abs(analytic), std::abs(numeric)});
}

}  // namespace

double finite_difference_check(const Network& net, const LossFn& loss_fn, const Matrix& batch, double epsilon,
                               FiniteDifferenceOptions options) {
  check_epsilon(epsilon);
  GradientSet analytic = GradientSet::zeros_like(net);
  finite_or_throw(loss_fn(net, batch, &analytic));

  // (block, offset) of every parameter, optionally subsampled.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  const auto blocks = net.parameter_blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b].size(); ++i) coords.emplace_back(b, i);
  }
  if (options.max_parameters != 0 && coords.size() > options.max_parameters) {
    Rng rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_parameters);
  }

  const auto grad_blocks = analytic.blocks();
  Network probe = net;
  auto probe_blocks = probe.parameter_blocks();
  double worst = 0.0;
  for (const auto& [b, i] : coords) {
    double& p = probe_blocks[b][i];
    const double saved = p;
    p = saved + epsilon;
    const double up = finite_or_throw(loss_fn(probe, batch, nullptr));
    p = saved - epsilon;
    const double down = finite_or_throw(loss_fn(probe, batch, nullptr));
    p = saved;
    worst = std::max(worst, relative_error(grad_blocks[b][i], (up - down) / (2.0 * epsilon)));
  }
  return worst;
}

double finite_difference_check(const MatrixFn& fn, const Matrix& at, double epsilon) {
  check_epsilon(epsilon);
  Matrix grad(at.rows(), at.cols());
  finite_or_throw(fn(at, &grad));
  if (grad.rows() != at.rows() || grad.cols() != at.cols()) throw ShapeError("gradient shape mismatch");
  Matrix x = at;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.values()[i];
    x.values()[i] = saved + epsilon;
    const double up = finite_or_throw(fn(x, nullptr));
    x.values()[i] = saved - epsilon;
    const double down = finite_or_throw(fn(x, nullptr));
    x.values()[i] = saved;
    worst = std::max(worst, relative_error(grad.values()[i], (up - down) / (2.0 * epsilon)));
  }
  return worst;
}

}  // namespace decor::nn
