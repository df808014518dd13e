// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "decor/errors.hpp"
#include "decor/rng.hpp"

namespace decor {

void ProbeConfig::validate() const {
  if (mode == ProbeMode::kSlep && samples_per_task < 1) throw ConfigError("must be >= 1", "probe.samples_per_task");
  if (epochs < 1) throw ConfigError("must be >= 1", "probe.epochs");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("must be positive", "probe.lr");
  if (batch_size < 1) throw ConfigError("must be >= 1", "probe.batch_size");
}

Matrix extract_features(const nn::Network& encoder, const TaskDataset& data) {
  if (data.feature_dim() != encoder.input_dim()) {
    throw ShapeError("encoder expects " + std::to_string(encoder.input_dim()) + " input features, task has " +
                     std::to_string(data.feature_dim()));
  }
  return nn::forward(encoder, data.samples);
}

TaskDataset subset_sample(const TaskDataset& data, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("subset size must be >= 1", "probe.samples_per_task");
  if (data.size() == 0) throw ConfigError("cannot subsample an empty task");
  if (n >= data.size()) return data;

  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);

  // Water-filling: equal quotas, capped by class size, leftovers redistributed.
  std::map<std::size_t, std::size_t> quota;
  std::size_t remaining = n;
  std::vector<std::size_t> open;
  for (const auto& [c, rows] : by_class) open.push_back(c);
  while (remaining > 0 && !open.empty()) {
    const std::size_t share = remaining / open.size();
    std::size_t extra = remaining % open.size();
    std::vector<std::size_t> still_open;
    std::size_t given = 0;
    for (std::size_t c : open) {
      const std::size_t want = share + (extra > 0 ? 1 : 0);
      if (extra > 0) --extra;
      const std::size_t room = by_class[c].size() - quota[c];
      const std::size_t take = std::min(want, room);
      quota[c] += take;
      given += take;
      if (quota[c] < by_class[c].size()) still_open.push_back(c);
    }
    remaining -= given;
    open = std::move(still_open);
  }

  Rng rng(seed);
  std::vector<std::size_t> picked;
  for (auto& [c, rows] : by_class) {
    std::vector<std::size_t> shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    picked.insert(picked.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(picked.begin(), picked.end());
  return data.select(picked);
}

namespace {

std::size_t argmax_over(std::span<const double> row, std::span<const std::size_t> classes) {
  std::size_t best = classes.front();
  for (std::size_t c : classes) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

}  // namespace

std::vector<double> linear_probe(std::span<const ProbeTaskData> tasks, std::size_t num_classes,
                                 const ProbeConfig& cfg) {
  cfg.validate();
  if (tasks.empty()) throw StateError("linear probe needs at least one seen task");
  const std::size_t dim = tasks.front().train_features.cols();

  Matrix train;
  std::vector<std::size_t> labels;
  for (const ProbeTaskData& t : tasks) {
    if (t.train_features.cols() != dim || t.test_features.cols() != dim) {
      throw ShapeError("probe tasks disagree on feature dimension");
    }
    if (t.train_labels.size() != t.train_features.rows() || t.test_labels.size() != t.test_features.rows()) {
      throw ShapeError("probe labels misaligned with features");
    }
    train = vstack(train, t.train_features);
    labels.insert(labels.end(), t.train_labels.begin(), t.train_labels.end());
  }
  if (labels.empty()) throw StateError("linear probe has no training samples");
  for (std::size_t l : labels) {
    if (l >= num_classes) throw IndexError("probe label outside class range");
  }
  std::vector<std::size_t> active(labels);
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());

  std::vector<double> mean(dim, 0.0), inv_std(dim, 1.0);
  if (cfg.standardize) {
    const double n = static_cast<double>(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) {
      for (std::size_t j = 0; j < dim; ++j) mean[j] += train(r, j);
    }
    for (double& m : mean) m /= n;
    std::vector<double> var(dim, 0.0);
    for (std::size_t r = 0; r < train.rows(); ++r) {
      for (std::size_t j = 0; j < dim; ++j) {
        const double c = train(r, j) - mean[j];
        var[j] += c * c;
      }
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const double sd = std::sqrt(var[j] / n);
      inv_std[j] = sd > 1e-12 ? 1.0 / sd : 0.0;
    }
  }
  const auto normalize = [&](Matrix m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t j = 0; j < dim; ++j) m(r, j) = (m(r, j) - mean[j]) * inv_std[j];
    }
    return m;
  };
  train = normalize(std::move(train));

  nn::Network classifier(std::vector<nn::Layer>{nn::Layer{nn::DenseParams(num_classes, dim), nn::Activation::kIdentity}});
  nn::Sgd sgd({cfg.lr, 0.0, 0.0});
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.rows());
  std::iota(order.begin(), order.end(), 0);
  nn::ForwardTrace trace;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Matrix x = train.gather_rows(rows);
      std::vector<std::size_t> y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) y[i] = labels[rows[i]];
      const Matrix logits = nn::forward(classifier, x, trace);
      const nn::BatchLoss loss = nn::mean_cross_entropy(logits, y, active);
      nn::GradientSet grads = nn::GradientSet::zeros_like(classifier);
      nn::backward(classifier, trace, loss.grad, grads);
      sgd.step(classifier, grads);
    }
  }

  std::vector<double> accuracy;
  for (const ProbeTaskData& t : tasks) {
    if (t.test_labels.empty()) {
      accuracy.push_back(0.0);
      continue;
    }
    const Matrix logits = nn::forward(classifier, normalize(t.test_features));
    std::size_t correct = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      if (argmax_over(logits.row(r), active) == t.test_labels[r]) ++correct;
    }
    accuracy.push_back(100.0 * static_cast<double>(correct) / static_cast<double>(t.test_labels.size()));
  }
  return accuracy;
}

std::vector<double> evaluate_encoder(const nn::Network& encoder, std::span<const TaskDataset> seen_tasks,
                                     std::size_t num_classes, const ProbeConfig& cfg) {
  std::vector<ProbeTaskData> data;
  for (const TaskDataset& task : seen_tasks) {
    TaskDataset train = task.only(Split::kTrain);
    if (cfg.mode == ProbeMode::kSlep) {
      train = subset_sample(train, cfg.samples_per_task, derive_seed(cfg.seed, "slep", {task.task_id}));
    }
    const TaskDataset test = task.only(Split::kTest);
    data.push_back(ProbeTaskData{extract_features(encoder, train), train.labels, extract_features(encoder, test),
                                 test.labels});
  }
  return linear_probe(data, num_classes, cfg);
}

}  // namespace decor
