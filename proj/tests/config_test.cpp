// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "decor/config.hpp"
#include "decor/errors.hpp"

namespace decor {
namespace {

using nlohmann::json;

std::string key_of(const json& doc) {
  try {
    config_from_json(doc);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(Config, DefaultsMatchBenchmark) {
  const ExperimentConfig cfg = config_from_json(json::object());
  EXPECT_EQ(cfg.method, Method::kFinetune);
  EXPECT_EQ(cfg.tasks, 5u);
  EXPECT_EQ(cfg.codebook_size, 32u);
  EXPECT_EQ(cfg.predictor_layers, 2u);
  EXPECT_DOUBLE_EQ(cfg.lambda, 0.2);
  EXPECT_EQ(cfg.epochs_per_task, 20u);
  EXPECT_EQ(cfg.probe.epochs, 50u);
  EXPECT_EQ(cfg.probe.samples_per_task, 200u);
  EXPECT_EQ(cfg.synthetic.num_classes, 10u);
  EXPECT_EQ(cfg.synthetic.feature_dim, 64u);
  EXPECT_EQ(cfg.synthetic.samples_per_class, 200u);
  EXPECT_DOUBLE_EQ(cfg.synthetic.class_separation, 6.0);
  EXPECT_DOUBLE_EQ(cfg.synthetic.within_class_sigma, 1.5);
  EXPECT_DOUBLE_EQ(cfg.synthetic.drift_sigma, 2.0);
  EXPECT_DOUBLE_EQ(cfg.nt_xent_temperature, 0.5);
  EXPECT_DOUBLE_EQ(cfg.lwf_temperature, 2.0);
  EXPECT_EQ(cfg.seeds, std::vector<std::uint64_t>{0});
}

TEST(Config, ParsesNestedSections) {
  const json doc = json::parse(R"({
    "method": "simclr+decor", "T": 10, "K": 16, "L": 3, "lambda": 0.5, "seeds": [1, 2, 3],
    "train": {"momentum": 0.5, "batch_size": 64},
    "model": {"encoder_hidden": [32, 32], "feature_dim": 12},
    "augment": {"noise_sigma": 0.2, "mask_fraction": 0.25},
    "probe": {"mode": "SLEP", "samples_per_task": 50},
    "kmeans": {"restarts": 3},
    "data": {"num_classes": 20, "drift_sigma": 1.0}
  })");
  const ExperimentConfig cfg = config_from_json(doc);
  EXPECT_EQ(cfg.method, Method::kSimclrDecor);
  EXPECT_EQ(cfg.tasks, 10u);
  EXPECT_EQ(cfg.codebook_size, 16u);
  EXPECT_EQ(cfg.predictor_layers, 3u);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(cfg.momentum, 0.5);
  EXPECT_EQ(cfg.batch_size, 64u);
  EXPECT_EQ(cfg.encoder_hidden, (std::vector<std::size_t>{32, 32}));
  EXPECT_EQ(cfg.feature_dim, 12u);
  EXPECT_DOUBLE_EQ(cfg.augment.mask_fraction, 0.25);
  EXPECT_EQ(cfg.probe.mode, ProbeMode::kSlep);
  EXPECT_EQ(cfg.probe.samples_per_task, 50u);
  EXPECT_EQ(cfg.kmeans_restarts, 3u);
  EXPECT_EQ(cfg.synthetic.num_classes, 20u);
  EXPECT_EQ(config_from_json(json::parse(R"({"seeds": 7})")).seeds, std::vector<std::uint64_t>{7});
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(key_of(json::parse(R"({"method": "decor", "K": 1})")), "K");
  EXPECT_EQ(key_of(json::parse(R"({"method": "decor", "L": 0})")), "L");
  EXPECT_EQ(key_of(json::parse(R"({"lambda": -1})")), "lambda");
  EXPECT_EQ(key_of(json::parse(R"({"method": "sgd"})")), "method");
  EXPECT_EQ(key_of(json::parse(R"({"K": "many"})")), "K");
  EXPECT_EQ(key_of(json::parse(R"({"colour": 1})")), "colour");
  EXPECT_EQ(key_of(json::parse(R"({"train": {"optimizer": "adam"}})")), "train.optimizer");
  EXPECT_EQ(key_of(json::parse(R"({"probe": {"mode": "kNN"}})")), "probe.mode");
  EXPECT_EQ(key_of(json::parse(R"({"data": {"num_classes": 9}})")), "T");
  EXPECT_EQ(key_of(json::parse(R"({"seeds": []})")), "seeds");
  EXPECT_EQ(key_of(json::parse("[1, 2]")), "config");
}

TEST(Config, JsonRoundTripAndHash) {
  ExperimentConfig cfg = config_from_json(json::parse(R"({"method": "lwf", "K": 8, "seeds": [4]})"));
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_EQ(config_hash(cfg).size(), 16u);

  ExperimentConfig other_seeds = cfg;
  other_seeds.seeds = {9, 10};
  other_seeds.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(other_seeds), config_hash(cfg));
  ExperimentConfig other_k = cfg;
  other_k.codebook_size = 16;
  EXPECT_NE(config_hash(other_k), config_hash(cfg));
}

TEST(Config, LoadFileResolvesPathsAndOverride) {
  const auto dir = std::filesystem::temp_directory_path() / "decor_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "c.json";
  std::ofstream(path) << R"({"data": {"source": "file", "path": "feats.csv"}, "output_dir": "out"})";

  unsetenv("DECOR_RESULTS_DIR");
  ExperimentConfig cfg = load_config(path);
  ASSERT_TRUE(cfg.feature_file.has_value());
  EXPECT_EQ(*cfg.feature_file, dir / "feats.csv");
  EXPECT_EQ(cfg.output_dir, "out");

  setenv("DECOR_RESULTS_DIR", "/tmp/decor_override", 1);
  EXPECT_EQ(load_config(path).output_dir, "/tmp/decor_override");
  unsetenv("DECOR_RESULTS_DIR");

  std::ofstream(path) << "{ not json";
  try {
    load_config(path);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "config");
  }
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace decor
