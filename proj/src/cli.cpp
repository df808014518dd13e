// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "decor/config.hpp"
#include "decor/errors.hpp"
#include "decor/results.hpp"

namespace decor {

namespace {

std::vector<std::size_t> parse_axis_values(const std::string& text, const std::string& axis) {
  std::vector<std::size_t> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (item.empty() || item.front() == '-' || item.front() == '+') throw std::invalid_argument(item);
      v = std::stoull(item, &used);
    } catch (const std::logic_error&) {
      throw ConfigError("grid value \"" + item + "\" is not a non-negative integer", axis);
    }
    if (used != item.size()) throw ConfigError("grid value \"" + item + "\" is not a non-negative integer", axis);
    values.push_back(static_cast<std::size_t>(v));
    start = end + 1;
  }
  return values;
}

void write_run_outputs(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  std::vector<std::string> jsonl, csv;
  for (const RunRecord& r : records) {
    jsonl.push_back(record_to_json(r).dump());
    for (std::string& row : runs_csv_rows(r)) csv.push_back(std::move(row));
  }
  append_lines(cfg.output_dir / "runs.jsonl", "", jsonl);
  append_lines(cfg.output_dir / "runs.csv", kRunsCsvHeader, csv);
}

void print_run(std::ostream& out, const RunRecord& r) {
  const ProtocolResult& p = r.primary_result();
  out << fmt::format("{} seed={} K={} L={} lambda={}: A_{}={:.2f} F_{}={:.2f} storage_bits={} ({:.0f} ms)\n",
                     to_string(r.method), r.seed, r.codebook_size, r.predictor_layers, r.lambda, r.tasks,
                     p.average.back(), r.tasks, p.forgetting.back(), r.storage_bits.back(), r.wall_ms);
}

int cmd_run(const std::string& config_path, std::ostream& out) {
  const ExperimentConfig cfg = load_config(config_path);
  std::vector<RunRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    records.push_back(run_experiment(cfg, seed));
    print_run(out, records.back());
  }
  write_run_outputs(cfg, records);
  out << fmt::format("wrote {} run(s) to {}\n", records.size(), cfg.output_dir.string());
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& grid_terms, std::size_t jobs,
              std::ostream& out) {
  const ExperimentConfig cfg = load_config(config_path);
  const SweepGrid grid = parse_grid(grid_terms, cfg);
  const std::vector<RunRecord> records = sweep(cfg, grid, jobs);
  std::vector<std::string> rows;
  for (const RunRecord& r : records) {
    print_run(out, r);
    rows.push_back(sweep_csv_row(r));
  }
  write_run_outputs(cfg, records);
  append_lines(cfg.output_dir / "sweep.csv", kSweepCsvHeader, rows);
  out << fmt::format("wrote {} sweep row(s) to {}\n", rows.size(), (cfg.output_dir / "sweep.csv").string());
  return kExitOk;
}

int cmd_report(const std::string& results_path, std::string curves_path, std::ostream& out) {
  const std::vector<RunSummary> runs = load_results(results_path);
  out << format_report(aggregate(runs));
  if (curves_path.empty()) {
    curves_path = (std::filesystem::path(results_path).parent_path() / "curves.csv").string();
  }
  std::ofstream curves(curves_path);
  if (!curves) throw Error("cannot write " + curves_path);
  curves << format_curves_csv(runs);
  out << "curves: " << curves_path << '\n';
  return kExitOk;
}

}  // namespace

SweepGrid parse_grid(const std::vector<std::string>& terms, const ExperimentConfig& base) {
  if (terms.empty()) return SweepGrid{};
  SweepGrid grid{{base.codebook_size}, {base.predictor_layers}};
  std::map<std::string, bool> given;
  for (const std::string& term : terms) {
    const std::size_t eq = term.find('=');
    if (eq == std::string::npos) throw ConfigError("grid term \"" + term + "\" must look like K=8,16", "grid");
    const std::string axis = term.substr(0, eq);
    if (axis != "K" && axis != "L") throw ConfigError("unknown grid axis \"" + axis + "\"", "grid");
    if (given[axis]) throw ConfigError("axis given twice", axis);
    given[axis] = true;
    std::vector<std::size_t> values = parse_axis_values(term.substr(eq + 1), axis);
    for (std::size_t v : values) {
      if (axis == "K" && v < 2) throw ConfigError("grid values must be >= 2", "K");
      if (axis == "L" && v < 1) throw ConfigError("grid values must be >= 1", "L");
    }
    (axis == "K" ? grid.codebook_sizes : grid.predictor_layers) = std::move(values);
  }
  return grid;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continual-learning benchmark with index-prediction regularization"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every seed of a config");
  run->add_option("--config", config_path, "Config file (JSON)")->required();

  std::vector<std::string> grid_terms;
  std::size_t jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a K x L grid over the config's seeds");
  sweep_cmd->add_option("--config", config_path, "Config file (JSON)")->required();
  sweep_cmd->add_option("--grid", grid_terms, "Axes, e.g. K=8,16,32,64 L=1,2,3");
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string results_path, curves_path;
  auto* report = app.add_subcommand("report", "Summarize a results file");
  report->add_option("--results", results_path, "runs.jsonl, runs.csv or sweep.csv")->required();
  report->add_option("--curves", curves_path, "Where to write per-task curves (default: curves.csv beside results)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out);
    if (*sweep_cmd) return cmd_sweep(config_path, grid_terms, jobs, out);
    return cmd_report(results_path, curves_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace decor
