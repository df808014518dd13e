// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "decor/cli.hpp"
#include "decor/config.hpp"
#include "decor/errors.hpp"
#include "decor/results.hpp"

namespace decor {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string drop_last_column(const std::string& row) { return row.substr(0, row.rfind(',')); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("decor_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Small, fast config; `extra` keys override.
  fs::path write_config(const std::string& name, json extra) {
    json doc = json::parse(R"({
      "epochs_per_task": 2, "K": 8, "predictor_hidden": 16,
      "model": {"encoder_hidden": [16], "feature_dim": 8, "projector_hidden": 16, "projector_dim": 8},
      "probe": {"epochs": 3, "samples_per_task": 20},
      "kmeans": {"restarts": 2},
      "data": {"feature_dim": 16, "samples_per_class": 40}
    })");
    doc["output_dir"] = (dir_ / name).string();
    doc.merge_patch(extra);
    const fs::path path = dir_ / (name + ".json");
    std::ofstream(path) << doc.dump(2);
    return path;
  }

  int cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, RunWritesRecords) {
  const fs::path cfg = write_config("ft", json{{"method", "finetune"}, {"seeds", {0}}});
  ASSERT_EQ(cli({"run", "--config", cfg.string()}), kExitOk) << err_.str();
  const auto jsonl = read_lines(dir_ / "ft" / "runs.jsonl");
  ASSERT_EQ(jsonl.size(), 1u);
  const RunRecord r = record_from_json(json::parse(jsonl[0]));
  EXPECT_EQ(r.method, Method::kFinetune);
  EXPECT_EQ(r.seed, 0u);
  const auto csv = read_lines(dir_ / "ft" / "runs.csv");
  ASSERT_EQ(csv.size(), 6u);
  EXPECT_EQ(csv[0], kRunsCsvHeader);
}

TEST_F(CliTest, InvalidCodebookSizeNamesKey) {
  const fs::path cfg = write_config("bad", json{{"method", "decor"}, {"K", 1}});
  EXPECT_EQ(cli({"run", "--config", cfg.string()}), kExitConfig);
  EXPECT_NE(err_.str().find("K"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(dir_ / "bad" / "runs.jsonl"));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}), kExitConfig);
  EXPECT_EQ(cli({"fly"}), kExitConfig);
  EXPECT_EQ(cli({"run"}), kExitConfig);
  EXPECT_EQ(cli({"run", "--config", (dir_ / "none.json").string()}), kExitConfig);
}

TEST_F(CliTest, RepeatedRunsMatchExceptWallClock) {
  const fs::path a = write_config("a", json{{"method", "decor"}, {"seeds", {0, 1}}});
  const fs::path b = write_config("b", json{{"method", "decor"}, {"seeds", {0, 1}}});
  ASSERT_EQ(cli({"run", "--config", a.string()}), kExitOk) << err_.str();
  ASSERT_EQ(cli({"run", "--config", b.string()}), kExitOk) << err_.str();
  const auto ja = read_lines(dir_ / "a" / "runs.jsonl");
  const auto jb = read_lines(dir_ / "b" / "runs.jsonl");
  ASSERT_EQ(ja.size(), 2u);
  ASSERT_EQ(jb.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(record_fingerprint(record_from_json(json::parse(ja[i]))),
              record_fingerprint(record_from_json(json::parse(jb[i]))));
  }
  const auto ca = read_lines(dir_ / "a" / "runs.csv");
  const auto cb = read_lines(dir_ / "b" / "runs.csv");
  ASSERT_EQ(ca.size(), cb.size());
  for (std::size_t i = 1; i < ca.size(); ++i) EXPECT_EQ(drop_last_column(ca[i]), drop_last_column(cb[i]));
}

TEST_F(CliTest, SweepWritesOneRowPerPointAndSeed) {
  const fs::path cfg = write_config("sw", json{{"method", "decor"}, {"epochs_per_task", 1}, {"seeds", {0}}});
  ASSERT_EQ(cli({"sweep", "--config", cfg.string(), "--grid", "K=8,16,32,64", "L=1,2,3"}), kExitOk) << err_.str();
  const auto rows = read_lines(dir_ / "sw" / "sweep.csv");
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0], kSweepCsvHeader);
  for (const char* col : {"K", "L", "A_T", "F_T"}) {
    EXPECT_NE(("," + rows[0] + ",").find("," + std::string(col) + ","), std::string::npos) << col;
  }
  EXPECT_EQ(rows[1].rfind("decor,5,8,1,", 0), 0u) << rows[1];
  EXPECT_EQ(rows[12].rfind("decor,5,64,3,", 0), 0u) << rows[12];
  EXPECT_EQ(read_lines(dir_ / "sw" / "runs.jsonl").size(), 12u);
}

TEST_F(CliTest, SweepRejectsInvalidGrid) {
  const fs::path cfg = write_config("sw", json{{"method", "decor"}});
  EXPECT_EQ(cli({"sweep", "--config", cfg.string(), "--grid", "K=8", "L=0"}), kExitConfig);
  EXPECT_NE(err_.str().find("L"), std::string::npos);
  EXPECT_EQ(cli({"sweep", "--config", cfg.string(), "--grid", "K=1"}), kExitConfig);
  EXPECT_EQ(cli({"sweep", "--config", cfg.string(), "--grid", "Q=3"}), kExitConfig);
}

TEST_F(CliTest, ReportAggregatesMethods) {
  for (const char* m : {"finetune", "decor"}) {
    json extra{{"method", m}, {"seeds", {0, 1, 2}}, {"output_dir", (dir_ / "res").string()}};
    ASSERT_EQ(cli({"run", "--config", write_config(m, extra).string()}), kExitOk) << err_.str();
  }
  ASSERT_EQ(cli({"report", "--results", (dir_ / "res" / "runs.jsonl").string()}), kExitOk) << err_.str();
  const std::string table = out_.str();
  EXPECT_NE(table.find("finetune"), std::string::npos);
  EXPECT_NE(table.find("decor"), std::string::npos);
  EXPECT_NE(table.find("A_T"), std::string::npos);
  EXPECT_NE(table.find("F_T"), std::string::npos);
  EXPECT_NE(table.find("storage"), std::string::npos);

  const auto curves = read_lines(dir_ / "res" / "curves.csv");
  ASSERT_FALSE(curves.empty());
  EXPECT_EQ(curves[0], "label,protocol,t,A_t_mean,A_t_std,F_t_mean,F_t_std,runs");
  EXPECT_EQ(curves.size(), 1u + 2 * 2 * 5);

  ASSERT_EQ(cli({"report", "--results", (dir_ / "res" / "runs.csv").string()}), kExitOk) << err_.str();
  EXPECT_EQ(aggregate(load_results(dir_ / "res" / "runs.csv")).size(), 2u);
}

TEST_F(CliTest, ReportErrors) {
  const fs::path missing = dir_ / "nothing.jsonl";
  EXPECT_EQ(cli({"report", "--results", missing.string()}), kExitRuntime);
  EXPECT_NE(err_.str().find(missing.string()), std::string::npos) << err_.str();
  std::ofstream(dir_ / "empty.jsonl").close();
  EXPECT_EQ(cli({"report", "--results", (dir_ / "empty.jsonl").string()}), kExitRuntime);
}

TEST(Results, SingleRunHasZeroStd) {
  EXPECT_EQ(summarize({42.0}).std, 0.0);
  EXPECT_EQ(summarize({42.0}).n, 1u);
  const Stat s = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(5.0 / 3.0));

  RunSummary run;
  run.method = "decor";
  run.tasks = 2;
  run.primary = {{80.0, 70.0}, {0.0, 5.0}};
  const auto rows = aggregate({run});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].runs, 1u);
  EXPECT_DOUBLE_EQ(rows[0].a.mean, 70.0);
  EXPECT_EQ(rows[0].a.std, 0.0);
  EXPECT_EQ(rows[0].f.std, 0.0);
}

TEST(Results, RecordJsonRoundTrip) {
  RunRecord r;
  r.config_hash = "0123456789abcdef";
  r.seed = 4;
  r.method = Method::kDecor;
  r.tasks = 2;
  r.codebook_size = 32;
  r.predictor_layers = 2;
  r.lambda = 0.2;
  for (ProtocolResult* p : {&r.lep, &r.slep}) {
    p->matrix = AccuracyMatrix(2);
    p->matrix.set(1, 1, 90.0);
    p->matrix.set(2, 1, 80.0);
    p->matrix.set(2, 2, 1.0 / 3.0);
    p->average = {90.0, average_accuracy(p->matrix, 2)};
    p->forgetting = {0.0, 10.0};
  }
  r.storage_bits = {0, 1600};
  r.decor_state_bytes = {0, 220};
  r.teacher_bytes = {0, 0};
  r.train_loss = {0.5, 0.25};
  r.distill_loss = {0.0, 2.5};
  r.decor_states = 1;
  r.events = {"train:1", "increment:2"};
  r.wall_ms = 12.5;
  const RunRecord back = record_from_json(record_to_json(r));
  EXPECT_EQ(record_to_json(back), record_to_json(r));
  EXPECT_EQ(back.lep.matrix, r.lep.matrix);
  RunRecord slower = r;
  slower.wall_ms = 99.0;
  EXPECT_EQ(record_fingerprint(slower), record_fingerprint(r));
  EXPECT_THROW(record_from_json(json::parse(R"({"seed": 1})")), ParseError);
}

TEST(Grid, ParsesAxes) {
  ExperimentConfig base;
  base.codebook_size = 16;
  base.predictor_layers = 3;
  const SweepGrid full = parse_grid({}, base);
  EXPECT_EQ(full.codebook_sizes, (std::vector<std::size_t>{8, 16, 32, 64}));
  EXPECT_EQ(full.predictor_layers, (std::vector<std::size_t>{1, 2, 3}));
  const SweepGrid k_only = parse_grid({"K=8,64"}, base);
  EXPECT_EQ(k_only.codebook_sizes, (std::vector<std::size_t>{8, 64}));
  EXPECT_EQ(k_only.predictor_layers, std::vector<std::size_t>{3});
  try {
    parse_grid({"L=0"}, base);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "L");
  }
  EXPECT_THROW(parse_grid({"K=8,x"}, base), ConfigError);
  EXPECT_THROW(parse_grid({"K=8", "K=16"}, base), ConfigError);
}

}  // namespace
}  // namespace decor
