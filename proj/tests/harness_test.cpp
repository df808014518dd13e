// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "decor/errors.hpp"
#include "decor/harness.hpp"

namespace decor {
namespace {

/// Row t: (1/t) sum_j A[t][j].
double naive_average(const std::vector<std::vector<double>>& a, std::size_t t) {
  double s = 0.0;
  for (std::size_t j = 0; j < t; ++j) s += a[t - 1][j];
  return s / static_cast<double>(t);
}

/// (1/(t-1)) sum_{j<t} max_{tau in [j, t]} (A[tau][j] - A[t][j]).
double naive_forgetting(const std::vector<std::vector<double>>& a, std::size_t t) {
  if (t == 1) return 0.0;
  double s = 0.0;
  for (std::size_t j = 1; j < t; ++j) {
    double best = -1e300;
    for (std::size_t tau = j; tau <= t; ++tau) best = std::max(best, a[tau - 1][j - 1] - a[t - 1][j - 1]);
    s += best;
  }
  return s / static_cast<double>(t - 1);
}

AccuracyMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  AccuracyMatrix m(rows.size());
  for (std::size_t t = 1; t <= rows.size(); ++t) {
    for (std::size_t j = 1; j <= t; ++j) m.set(t, j, rows[t - 1][j - 1]);
  }
  return m;
}

ExperimentConfig tiny_config(Method method) {
  ExperimentConfig cfg;
  cfg.method = method;
  cfg.synthetic.feature_dim = 16;
  cfg.synthetic.samples_per_class = 50;
  cfg.encoder_hidden = {16};
  cfg.projector_hidden = 16;
  cfg.projector_dim = 8;
  cfg.predictor_hidden = 16;
  cfg.codebook_size = 8;
  cfg.epochs_per_task = 3;
  cfg.probe.epochs = 5;
  cfg.probe.samples_per_task = 20;
  cfg.kmeans_restarts = 2;
  return cfg;
}

void expect_same_metrics(const RunRecord& a, const RunRecord& b) {
  EXPECT_EQ(a.lep.matrix, b.lep.matrix);
  EXPECT_EQ(a.slep.matrix, b.slep.matrix);
  EXPECT_EQ(a.lep.average, b.lep.average);
  EXPECT_EQ(a.lep.forgetting, b.lep.forgetting);
}

TEST(Metrics, WorkedExample) {
  const AccuracyMatrix m = to_matrix({{90}, {80, 85}, {70, 80, 95}});
  EXPECT_NEAR(average_accuracy(m, 3), 245.0 / 3.0, 1e-12);
  EXPECT_NEAR(average_accuracy(m, 3), 81.6667, 1e-4);
  EXPECT_DOUBLE_EQ(max_forgetting(m, 3), 12.5);
  EXPECT_DOUBLE_EQ(average_accuracy(m, 1), 90.0);
  EXPECT_EQ(max_forgetting(m, 1), 0.0);
  EXPECT_DOUBLE_EQ(max_forgetting(m, 2), 10.0);
}

TEST(Metrics, MatchNaiveImplementationOnRandomMatrices) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t tasks = 1 + static_cast<std::size_t>(trial % 10);
    std::vector<std::vector<double>> rows(tasks);
    for (std::size_t t = 0; t < tasks; ++t) {
      for (std::size_t j = 0; j <= t; ++j) rows[t].push_back(pct(rng));
    }
    const AccuracyMatrix m = to_matrix(rows);
    for (std::size_t t = 1; t <= tasks; ++t) {
      EXPECT_NEAR(average_accuracy(m, t), naive_average(rows, t), 1e-12);
      EXPECT_NEAR(max_forgetting(m, t), naive_forgetting(rows, t), 1e-12);
      EXPECT_GE(max_forgetting(m, t), 0.0);
    }
  }
}

TEST(Metrics, ConstantAndNonDecreasingMatrices) {
  const AccuracyMatrix c = to_matrix({{42}, {42, 42}, {42, 42, 42}, {42, 42, 42, 42}});
  for (std::size_t t = 1; t <= 4; ++t) {
    EXPECT_DOUBLE_EQ(average_accuracy(c, t), 42.0);
    EXPECT_EQ(max_forgetting(c, t), 0.0);
  }
  const AccuracyMatrix up = to_matrix({{50}, {60, 40}, {70, 45, 80}});
  EXPECT_EQ(max_forgetting(up, 3), 0.0);
}

TEST(AccuracyMatrix, WriteOnceAndRanges) {
  AccuracyMatrix m(3);
  m.set(2, 1, 50.0);
  EXPECT_THROW(m.set(2, 1, 60.0), StateError);
  EXPECT_THROW(m.set(1, 2, 50.0), IndexError);
  EXPECT_THROW(m.set(4, 1, 50.0), IndexError);
  EXPECT_THROW(m.set(0, 0, 50.0), IndexError);
  EXPECT_THROW(m.set(3, 1, 100.5), IndexError);
  EXPECT_THROW(m.set(3, 1, -0.1), IndexError);
  EXPECT_THROW(m.at(3, 3), StateError);
  EXPECT_FALSE(m.row_complete(2));
  EXPECT_THROW(average_accuracy(m, 2), StateError);
  EXPECT_THROW(max_forgetting(m, 2), StateError);
  m.set(2, 2, 70.0);
  EXPECT_TRUE(m.row_complete(2));
  EXPECT_EQ(m.row(2), (std::vector<double>{50.0, 70.0}));
  EXPECT_THROW(max_forgetting(m, 2), StateError);  // row 1 missing
}

TEST(EventOrder, DetectsUpdateBeforeIncrement) {
  RunRecord r;
  r.method = Method::kDecor;
  r.tasks = 2;
  r.events = {"train:1", "update:1", "evaluate:1", "increment:2", "train:2", "update:2", "evaluate:2"};
  EXPECT_NO_THROW(verify_event_order(r));
  r.events = {"train:1", "update:1", "evaluate:1", "train:2", "update:2", "increment:2", "evaluate:2"};
  EXPECT_THROW(verify_event_order(r), StateError);
  r.events = {"train:1", "update:1", "evaluate:1", "train:2", "update:2", "evaluate:2"};
  EXPECT_THROW(verify_event_order(r), StateError);
  r.method = Method::kFinetune;
  EXPECT_NO_THROW(verify_event_order(r));
}

TEST(RunSequence, DecorRecordShape) {
  const ExperimentConfig cfg = tiny_config(Method::kDecor);
  const RunRecord r = run_experiment(cfg, 0);
  EXPECT_EQ(r.tasks, 5u);
  EXPECT_EQ(r.decor_states, 4u);
  EXPECT_NO_THROW(verify_event_order(r));
  ASSERT_EQ(r.storage_bits.size(), 5u);
  EXPECT_EQ(r.storage_bits[0], 0u);
  EXPECT_EQ(r.decor_state_bytes[0], 0u);
  const std::uint64_t train_per_task = 2 * 40;
  for (std::size_t t = 1; t < 5; ++t) {
    EXPECT_EQ(r.storage_bits[t], train_per_task * 3);
    EXPECT_EQ(r.decor_state_bytes[t], DecorState::kHeaderBytes + (train_per_task * 3 + 7) / 8);
    EXPECT_EQ(r.teacher_bytes[t], 0u);
    EXPECT_GT(r.distill_loss[t], 0.0);
  }
  EXPECT_EQ(r.distill_loss[0], 0.0);
  for (std::size_t t = 1; t <= 5; ++t) {
    EXPECT_TRUE(r.lep.matrix.row_complete(t));
    EXPECT_TRUE(r.slep.matrix.row_complete(t));
    EXPECT_DOUBLE_EQ(r.lep.average[t - 1], average_accuracy(r.lep.matrix, t));
    EXPECT_DOUBLE_EQ(r.lep.forgetting[t - 1], max_forgetting(r.lep.matrix, t));
  }
  EXPECT_EQ(std::count(r.events.begin(), r.events.end(), "increment:1"), 0);
  EXPECT_EQ(std::count(r.events.begin(), r.events.end(), "increment:5"), 1);
}

TEST(RunSequence, ZeroLambdaMatchesFinetune) {
  ExperimentConfig decor = tiny_config(Method::kDecor);
  decor.lambda = 0.0;
  for (std::uint64_t seed : {0u, 1u}) {
    expect_same_metrics(run_experiment(decor, seed), run_experiment(tiny_config(Method::kFinetune), seed));
  }
  ExperimentConfig ssl = tiny_config(Method::kSimclrDecor);
  ssl.lambda = 0.0;
  expect_same_metrics(run_experiment(ssl, 0), run_experiment(tiny_config(Method::kSimclr), 0));
}

TEST(RunSequence, SingleTaskHasNoForgetting) {
  for (Method m : {Method::kFinetune, Method::kDecor, Method::kLwf, Method::kSimclrDecor}) {
    ExperimentConfig cfg = tiny_config(m);
    cfg.tasks = 1;
    cfg.synthetic.num_classes = 2;
    const RunRecord r = run_experiment(cfg, 0);
    EXPECT_EQ(r.lep.forgetting, std::vector<double>{0.0});
    EXPECT_EQ(r.lep.average[0], r.lep.matrix.at(1, 1));
    EXPECT_EQ(r.decor_states, 0u);
  }
}

TEST(RunSequence, DeterministicForASeed) {
  for (Method m : {Method::kDecor, Method::kLwf, Method::kSimclrDecor}) {
    const ExperimentConfig cfg = tiny_config(m);
    const RunRecord a = run_experiment(cfg, 3);
    const RunRecord b = run_experiment(cfg, 3);
    expect_same_metrics(a, b);
    EXPECT_EQ(a.train_loss, b.train_loss);
    EXPECT_EQ(a.events, b.events);
  }
}

TEST(RunSequence, TeacherBaselineStoresSnapshot) {
  const RunRecord r = run_experiment(tiny_config(Method::kLwf), 0);
  EXPECT_EQ(r.teacher_bytes[0], 0u);
  EXPECT_EQ(r.decor_states, 0u);
  for (std::size_t t = 1; t < 5; ++t) {
    EXPECT_GT(r.teacher_bytes[t], 0u);
    EXPECT_EQ(r.storage_bits[t], 8 * r.teacher_bytes[t]);
  }
}

TEST(RunSequence, ContrastiveMethodsRun) {
  for (Method m : {Method::kSimclr, Method::kSimclrDecor, Method::kSimclrLwf}) {
    const RunRecord r = run_experiment(tiny_config(m), 0);
    EXPECT_EQ(r.method, m);
    for (double l : r.train_loss) EXPECT_TRUE(std::isfinite(l));
    EXPECT_EQ(r.decor_states, m == Method::kSimclrDecor ? 4u : 0u);
  }
}

TEST(RunSequence, TenSingletonTasks) {
  ExperimentConfig cfg = tiny_config(Method::kDecor);
  cfg.tasks = 10;
  cfg.codebook_size = 4;
  const RunRecord r = run_experiment(cfg, 0);
  EXPECT_EQ(r.decor_states, 9u);
  EXPECT_TRUE(r.lep.matrix.row_complete(10));
}

TEST(RunSequence, RejectsBadInputs) {
  ExperimentConfig cfg = tiny_config(Method::kDecor);
  cfg.codebook_size = 1;
  EXPECT_THROW(run_experiment(cfg, 0), ConfigError);

  cfg = tiny_config(Method::kFinetune);
  auto tasks = generate_synthetic_tasks(cfg.synthetic, 5);
  tasks[1].labels = tasks[0].labels;
  EXPECT_THROW(run_sequence(cfg, tasks, 10, 0), ConfigError);

  cfg = tiny_config(Method::kFinetune);
  cfg.lr = 1e6;
  try {
    run_experiment(cfg, 0);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("diverged on task"), std::string::npos) << e.what();
  }
}

TEST(Sweep, CardinalityOrderAndDefaultPoint) {
  ExperimentConfig base = tiny_config(Method::kDecor);
  base.codebook_size = 32;
  base.predictor_layers = 2;
  base.epochs_per_task = 1;
  base.probe.epochs = 2;
  const auto records = sweep(base, SweepGrid{});
  ASSERT_EQ(records.size(), 12u);
  std::size_t i = 0;
  for (std::size_t k : {8, 16, 32, 64}) {
    for (std::size_t l : {1, 2, 3}) {
      EXPECT_EQ(records[i].codebook_size, k);
      EXPECT_EQ(records[i].predictor_layers, l);
      ++i;
    }
  }
  expect_same_metrics(records[7], run_experiment(base, 0));

  const auto threaded = sweep(base, SweepGrid{}, 3);
  ASSERT_EQ(threaded.size(), 12u);
  for (std::size_t j = 0; j < 12; ++j) expect_same_metrics(threaded[j], records[j]);

  EXPECT_THROW(sweep(base, SweepGrid{{}, {1}}), ConfigError);
  EXPECT_THROW(sweep(base, SweepGrid{{8}, {0}}), ConfigError);
}

}  // namespace
}  // namespace decor
