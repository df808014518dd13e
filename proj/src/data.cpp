// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include <fmt/format.h>

#include "decor/errors.hpp"
#include "decor/rng.hpp"

namespace decor {

// ---------------------------------------------------------------------------
// TaskDataset

std::vector<std::size_t> TaskDataset::class_set() const {
  std::vector<std::size_t> classes(labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

TaskDataset TaskDataset::select(std::span<const std::size_t> rows) const {
  TaskDataset out;
  out.task_id = task_id;
  out.samples = samples.gather_rows(rows);
  out.labels.reserve(rows.size());
  out.sample_ids.reserve(rows.size());
  out.splits.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels.push_back(labels[r]);
    out.sample_ids.push_back(sample_ids[r]);
    out.splits.push_back(splits[r]);
  }
  return out;
}

TaskDataset TaskDataset::only(Split split) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == split) rows.push_back(i);
  }
  return select(rows);
}

void TaskDataset::validate(std::size_t num_classes) const {
  const std::size_t n = labels.size();
  if (samples.rows() != n || sample_ids.size() != n || splits.size() != n) {
    throw ValidationError("task " + std::to_string(task_id) + ": misaligned columns");
  }
  for (std::size_t label : labels) {
    if (label >= num_classes) {
      throw ValidationError("task " + std::to_string(task_id) + ": label " + std::to_string(label) +
                            " outside declared class count " + std::to_string(num_classes));
    }
  }
  if (!all_finite(samples.values())) throw ValidationError("task " + std::to_string(task_id) + ": non-finite feature");
}

void validate_sequence(std::span<const TaskDataset> tasks, std::size_t num_classes) {
  std::set<std::size_t> seen_classes;
  std::unordered_set<SampleId> seen_ids;
  std::size_t dim = tasks.empty() ? 0 : tasks.front().feature_dim();
  for (const TaskDataset& task : tasks) {
    task.validate(num_classes);
    if (task.feature_dim() != dim) throw ValidationError("tasks disagree on feature dimension");
    for (std::size_t c : task.class_set()) {
      if (!seen_classes.insert(c).second) {
        throw ValidationError("class " + std::to_string(c) + " appears in more than one task");
      }
    }
    for (SampleId id : task.sample_ids) {
      if (!seen_ids.insert(id).second) throw ValidationError("duplicate sample id " + std::to_string(id));
    }
  }
}

// ---------------------------------------------------------------------------
// Synthetic generator

void SyntheticConfig::validate() const {
  if (num_classes == 0) throw ConfigError("must be positive", "data.num_classes");
  if (feature_dim == 0) throw ConfigError("must be positive", "data.feature_dim");
  if (samples_per_class == 0) throw ConfigError("must be positive", "data.samples_per_class");
  if (!(class_separation > 0.0)) throw ConfigError("must be positive", "data.class_separation");
  if (!(within_class_sigma >= 0.0)) throw ConfigError("must be non-negative", "data.within_class_sigma");
  if (!(drift_sigma >= 0.0)) throw ConfigError("must be non-negative", "data.drift_sigma");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("must lie in [0, 1)", "data.test_fraction");
}

std::vector<std::vector<std::size_t>> split_classes_into_tasks(std::size_t num_classes, std::size_t tasks,
                                                               std::uint64_t seed) {
  if (tasks == 0) throw ConfigError("must be positive", "T");
  if (num_classes == 0 || num_classes % tasks != 0) {
    throw ConfigError(std::to_string(num_classes) + " classes cannot be split evenly into " + std::to_string(tasks) +
                          " tasks",
                      "T");
  }
  std::vector<std::size_t> perm(num_classes);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t per_task = num_classes / tasks;
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t t = 0; t < tasks; ++t) {
    std::vector<std::size_t> set(perm.begin() + static_cast<std::ptrdiff_t>(t * per_task),
                                 perm.begin() + static_cast<std::ptrdiff_t>((t + 1) * per_task));
    std::sort(set.begin(), set.end());
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<TaskDataset> generate_synthetic_tasks(const SyntheticConfig& cfg, std::size_t tasks) {
  cfg.validate();
  const auto class_sets = split_classes_into_tasks(cfg.num_classes, tasks, derive_seed(cfg.seed, "classes"));
  const std::size_t d = cfg.feature_dim;

  Rng mean_rng(derive_seed(cfg.seed, "means"));
  std::normal_distribution<double> unit(0.0, 1.0);
  Matrix means(cfg.num_classes, d);
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    auto row = means.row(c);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& v : row) {
        v = unit(mean_rng);
        norm2 += v * v;
      }
    } while (norm2 == 0.0);
    const double scale = cfg.class_separation / std::sqrt(norm2);
    for (double& v : row) v *= scale;
  }

  const std::size_t test_per_class = static_cast<std::size_t>(
      std::lround(cfg.test_fraction * static_cast<double>(cfg.samples_per_class)));
  SampleId next_id = 0;
  std::vector<TaskDataset> out;
  for (std::size_t t = 0; t < tasks; ++t) {
    Rng rng(derive_seed(cfg.seed, "task", {t}));
    std::vector<double> drift(d);
    const double drift_scale = cfg.drift_sigma / std::sqrt(static_cast<double>(d));
    for (double& v : drift) v = drift_scale * unit(rng);

    TaskDataset task;
    task.task_id = t;
    const std::size_t n = class_sets[t].size() * cfg.samples_per_class;
    task.samples = Matrix(n, d);
    std::size_t row = 0;
    for (std::size_t c : class_sets[t]) {
      std::vector<Split> splits(cfg.samples_per_class, Split::kTrain);
      std::fill(splits.begin(), splits.begin() + static_cast<std::ptrdiff_t>(test_per_class), Split::kTest);
      std::shuffle(splits.begin(), splits.end(), rng);
      for (std::size_t s = 0; s < cfg.samples_per_class; ++s, ++row) {
        auto x = task.samples.row(row);
        const auto mu = means.row(c);
        for (std::size_t j = 0; j < d; ++j) x[j] = mu[j] + drift[j] + cfg.within_class_sigma * unit(rng);
        task.labels.push_back(c);
        task.sample_ids.push_back(next_id++);
        task.splits.push_back(splits[s]);
      }
    }
    out.push_back(std::move(task));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature file format

namespace {

constexpr std::string_view kMagic = "#decor-features";

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::size_t header_value(std::string_view token, std::string_view key, std::size_t line) {
  if (token.substr(0, key.size() + 1) != std::string(key) + "=") {
    throw ParseError("header: expected " + std::string(key) + "=<n>", line);
  }
  std::size_t v = 0;
  if (!parse_number(token.substr(key.size() + 1), v) || v == 0) {
    throw ParseError("header: " + std::string(key) + " must be a positive integer", line);
  }
  return v;
}

}  // namespace

FeatureFile parse_feature_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  FeatureFile file;
  if (!std::getline(in, line)) throw ParseError("missing header (empty file)", 1);
  line_no = 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::istringstream header(line);
    std::string magic, version, classes, dim, extra;
    header >> magic >> version >> classes >> dim;
    if (magic != kMagic) throw ParseError("missing '#decor-features' header", line_no);
    if (version != "v1") throw ParseError("unsupported format version '" + version + "'", line_no);
    file.num_classes = header_value(classes, "num_classes", line_no);
    file.feature_dim = header_value(dim, "feature_dim", line_no);
    if (header >> extra) throw ParseError("unexpected header token '" + extra + "'", line_no);
  }

  const std::size_t expected = 4 + file.feature_dim;
  std::map<std::size_t, TaskDataset> tasks;
  std::map<std::size_t, std::vector<double>> rows;
  std::unordered_set<SampleId> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != expected) {
      throw ParseError("expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    std::size_t task_id = 0;
    SampleId sample_id = 0;
    std::size_t label = 0;
    if (!parse_number(fields[0], task_id)) throw ParseError("bad task_id '" + std::string(fields[0]) + "'", line_no);
    if (!parse_number(fields[1], sample_id)) {
      throw ParseError("bad sample_id '" + std::string(fields[1]) + "'", line_no);
    }
    Split split;
    if (fields[2] == "train") {
      split = Split::kTrain;
    } else if (fields[2] == "test") {
      split = Split::kTest;
    } else {
      throw ParseError("split must be 'train' or 'test', got '" + std::string(fields[2]) + "'", line_no);
    }
    if (!parse_number(fields[3], label)) throw ParseError("bad label '" + std::string(fields[3]) + "'", line_no);
    if (label >= file.num_classes) {
      throw ValidationError("line " + std::to_string(line_no) + ": label " + std::to_string(label) +
                            " outside declared class count " + std::to_string(file.num_classes));
    }
    if (!ids.insert(sample_id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate sample id " + std::to_string(sample_id));
    }
    auto& values = rows[task_id];
    for (std::size_t j = 0; j < file.feature_dim; ++j) {
      double v = 0.0;
      if (!parse_number(fields[4 + j], v) || !std::isfinite(v)) {
        throw ParseError("bad feature value '" + std::string(fields[4 + j]) + "' in column " + std::to_string(5 + j),
                         line_no);
      }
      values.push_back(v);
    }
    TaskDataset& task = tasks[task_id];
    task.task_id = task_id;
    task.labels.push_back(label);
    task.sample_ids.push_back(sample_id);
    task.splits.push_back(split);
  }

  for (auto& [id, task] : tasks) {
    const auto& values = rows[id];
    task.samples = Matrix(task.labels.size(), file.feature_dim);
    std::copy(values.begin(), values.end(), task.samples.values().begin());
    file.tasks.push_back(std::move(task));
  }
  validate_sequence(file.tasks, file.num_classes);
  return file;
}

FeatureFile load_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open feature file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_feature_text(buffer.str());
}

std::string format_feature_text(std::span<const TaskDataset> tasks, std::size_t num_classes) {
  validate_sequence(tasks, num_classes);
  const std::size_t dim = tasks.empty() ? 0 : tasks.front().feature_dim();
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "{} v1 num_classes={} feature_dim={}\n", kMagic, num_classes, dim);
  for (const TaskDataset& task : tasks) {
    for (std::size_t i = 0; i < task.size(); ++i) {
      fmt::format_to(std::back_inserter(out), "{},{},{},{}", task.task_id, task.sample_ids[i],
                     task.splits[i] == Split::kTrain ? "train" : "test", task.labels[i]);
      for (double v : task.samples.row(i)) fmt::format_to(std::back_inserter(out), ",{}", v);
      out.push_back('\n');
    }
  }
  return fmt::to_string(out);
}

void save_feature_file(const std::filesystem::path& path, std::span<const TaskDataset> tasks,
                       std::size_t num_classes) {
  const std::string text = format_feature_text(tasks, num_classes);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write feature file " + path.string());
  out << text;
}

}  // namespace decor
