// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "decor/data.hpp"
#include "decor/errors.hpp"
#include "decor/kmeans.hpp"
#include "decor/probe.hpp"

namespace decor {
namespace {

SyntheticConfig small_config() {
  SyntheticConfig cfg;
  cfg.feature_dim = 16;
  cfg.samples_per_class = 20;
  cfg.seed = 3;
  return cfg;
}

TEST(SplitClasses, TwoClassesPerTask) {
  const auto sets = split_classes_into_tasks(10, 5, 1);
  ASSERT_EQ(sets.size(), 5u);
  std::set<std::size_t> all;
  for (const auto& s : sets) {
    EXPECT_EQ(s.size(), 2u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    all.insert(s.begin(), s.end());
  }
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(*all.rbegin(), 9u);
  EXPECT_EQ(split_classes_into_tasks(10, 5, 1), sets);
}

TEST(SplitClasses, SingletonsAndErrors) {
  const auto sets = split_classes_into_tasks(10, 10, 2);
  std::set<std::size_t> all;
  for (const auto& s : sets) {
    ASSERT_EQ(s.size(), 1u);
    all.insert(s[0]);
  }
  EXPECT_EQ(all.size(), 10u);
  EXPECT_THROW(split_classes_into_tasks(9, 5, 0), ConfigError);
  EXPECT_THROW(split_classes_into_tasks(10, 0, 0), ConfigError);
}

TEST(Synthetic, ShapesSplitsAndIds) {
  const SyntheticConfig cfg = small_config();
  const auto tasks = generate_synthetic_tasks(cfg, 5);
  ASSERT_EQ(tasks.size(), 5u);
  std::set<SampleId> ids;
  for (std::size_t t = 0; t < 5; ++t) {
    const TaskDataset& d = tasks[t];
    EXPECT_EQ(d.task_id, t);
    EXPECT_EQ(d.size(), 40u);
    EXPECT_EQ(d.feature_dim(), 16u);
    EXPECT_EQ(d.class_set().size(), 2u);
    EXPECT_EQ(d.only(Split::kTest).size(), 8u);
    for (std::size_t c : d.class_set()) {
      std::size_t test = 0;
      for (std::size_t i = 0; i < d.size(); ++i) test += d.labels[i] == c && d.splits[i] == Split::kTest;
      EXPECT_EQ(test, 4u);
    }
    ids.insert(d.sample_ids.begin(), d.sample_ids.end());
  }
  EXPECT_EQ(ids.size(), 200u);
  EXPECT_NO_THROW(validate_sequence(tasks, 10));
}

TEST(Synthetic, Deterministic) {
  const SyntheticConfig cfg = small_config();
  EXPECT_EQ(generate_synthetic_tasks(cfg, 5), generate_synthetic_tasks(cfg, 5));
  SyntheticConfig other = cfg;
  other.seed = 4;
  EXPECT_NE(generate_synthetic_tasks(cfg, 5), generate_synthetic_tasks(other, 5));
}

TEST(Synthetic, ZeroNoiseSamplesSitOnClassMeans) {
  SyntheticConfig cfg = small_config();
  cfg.within_class_sigma = 0.0;
  cfg.drift_sigma = 0.0;
  for (const TaskDataset& d : generate_synthetic_tasks(cfg, 5)) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      double norm2 = 0.0;
      for (double v : d.samples.row(i)) norm2 += v * v;
      EXPECT_NEAR(std::sqrt(norm2), cfg.class_separation, 1e-12);
    }
  }
}

TEST(Synthetic, ZeroNoiseClassesAreRecoveredByKMeans) {
  SyntheticConfig cfg = small_config();
  cfg.within_class_sigma = 0.0;
  const auto tasks = generate_synthetic_tasks(cfg, 5);
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  for (const TaskDataset& d : tasks) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto r = d.samples.row(i);
      rows.emplace_back(r.begin(), r.end());
      labels.push_back(d.labels[i]);
    }
  }
  KMeansOptions opts;
  opts.k = 10;
  const KMeansResult r = kmeans_fit(Matrix::from_rows(rows), opts);
  EXPECT_EQ(r.objective, 0.0);
  std::vector<int> code_of_class(10, -1);
  std::set<std::uint32_t> codes;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto code = static_cast<int>(r.assignment.indices[i]);
    if (code_of_class[labels[i]] < 0) code_of_class[labels[i]] = code;
    EXPECT_EQ(code_of_class[labels[i]], code);
    codes.insert(r.assignment.indices[i]);
  }
  EXPECT_EQ(codes.size(), 10u);
}

TEST(Synthetic, WithinClassSpreadMatchesSigma) {
  SyntheticConfig cfg = small_config();
  cfg.samples_per_class = 400;
  cfg.within_class_sigma = 1.5;
  const TaskDataset d = generate_synthetic_tasks(cfg, 5)[0];
  const std::size_t c = d.class_set()[0];
  std::vector<double> mean(d.feature_dim(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] != c) continue;
    ++n;
    for (std::size_t j = 0; j < d.feature_dim(); ++j) mean[j] += d.samples(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] != c) continue;
    for (std::size_t j = 0; j < d.feature_dim(); ++j) ss += std::pow(d.samples(i, j) - mean[j], 2);
  }
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>((n - 1) * d.feature_dim())), 1.5, 0.05);
}

TEST(Synthetic, WideSeparationIsLinearlySeparable) {
  SyntheticConfig cfg;
  cfg.within_class_sigma = 1.0;
  cfg.class_separation = 10.0;
  cfg.samples_per_class = 100;
  cfg.seed = 5;
  const auto tasks = generate_synthetic_tasks(cfg, 5);
  std::vector<ProbeTaskData> probe;
  for (const TaskDataset& d : tasks) {
    const TaskDataset train = d.only(Split::kTrain);
    const TaskDataset test = d.only(Split::kTest);
    probe.push_back({train.samples, train.labels, test.samples, test.labels});
  }
  for (double a : linear_probe(probe, 10, ProbeConfig{})) EXPECT_GT(a, 95.0);
}

TEST(Synthetic, ConfigValidation) {
  SyntheticConfig cfg = small_config();
  cfg.within_class_sigma = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.test_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.num_classes = 9;
  EXPECT_THROW(generate_synthetic_tasks(cfg, 5), ConfigError);
}

TEST(FeatureFile, RoundTripIsExact) {
  const auto tasks = generate_synthetic_tasks(small_config(), 5);
  const FeatureFile back = parse_feature_text(format_feature_text(tasks, 10));
  EXPECT_EQ(back.num_classes, 10u);
  EXPECT_EQ(back.feature_dim, 16u);
  EXPECT_EQ(back.tasks, tasks);

  const auto path = std::filesystem::temp_directory_path() / "decor_data_test_roundtrip.csv";
  save_feature_file(path, tasks, 10);
  EXPECT_EQ(load_feature_file(path).tasks, tasks);
  std::filesystem::remove(path);
}

TEST(FeatureFile, WrongColumnCountNamesLine) {
  std::string text = "#decor-features v1 num_classes=2 feature_dim=2\n";
  for (int i = 0; i < 5; ++i) text += "0," + std::to_string(i) + ",train," + std::to_string(i % 2) + ",0.5,1.5\n";
  text += "0,5,train,1,0.5\n";
  try {
    parse_feature_text(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(FeatureFile, MalformedInputs) {
  EXPECT_THROW(parse_feature_text(""), ParseError);
  EXPECT_THROW(parse_feature_text("task_id,sample_id\n"), ParseError);
  const std::string header = "#decor-features v1 num_classes=2 feature_dim=1\n";
  EXPECT_THROW(parse_feature_text(header + "0,0,valid,0,1.0\n"), ParseError);
  EXPECT_THROW(parse_feature_text(header + "0,0,train,0,abc\n"), ParseError);
  EXPECT_THROW(parse_feature_text(header + "0,0,train,2,1.0\n"), ValidationError);
  EXPECT_THROW(parse_feature_text(header + "0,0,train,0,1.0\n1,0,train,1,1.0\n"), ValidationError);
  EXPECT_THROW(parse_feature_text(header + "0,0,train,0,1.0\n1,1,train,0,1.0\n"), ValidationError);
  EXPECT_THROW(load_feature_file("/nonexistent/decor/features.csv"), Error);
}

TEST(TaskDataset, SelectOnlyAndValidate) {
  TaskDataset d;
  d.samples = Matrix::from_rows({{1}, {2}, {3}});
  d.labels = {0, 1, 0};
  d.sample_ids = {10, 11, 12};
  d.splits = {Split::kTrain, Split::kTest, Split::kTrain};
  EXPECT_EQ(d.class_set(), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(d.only(Split::kTrain).sample_ids, (std::vector<SampleId>{10, 12}));
  const std::vector<std::size_t> rows{2, 0};
  EXPECT_EQ(d.select(rows).samples, Matrix::from_rows({{3}, {1}}));
  EXPECT_NO_THROW(d.validate(2));
  EXPECT_THROW(d.validate(1), ValidationError);
  d.splits.pop_back();
  EXPECT_THROW(d.validate(2), ValidationError);
}

}  // namespace
}  // namespace decor
