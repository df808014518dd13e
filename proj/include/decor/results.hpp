// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "decor/harness.hpp"

// Result files: one JSON object per run in runs.jsonl, a per-task flat CSV
// (runs.csv) and a per-run sweep CSV. Column layouts are in docs/results.md.

namespace decor {

nlohmann::json record_to_json(const RunRecord& record);
/// Inverse of record_to_json. Throws ParseError on a malformed record.
RunRecord record_from_json(const nlohmann::json& doc);

/// JSON line with wall-clock fields removed, for determinism comparisons.
std::string record_fingerprint(const RunRecord& record);

inline constexpr const char* kRunsCsvHeader = "method,T,K,L,lambda,seed,t,A_t,F_t,storage_bits,wall_ms";
inline constexpr const char* kSweepCsvHeader =
    "method,T,K,L,lambda,seed,protocol,A_T,F_T,lep_A_T,lep_F_T,slep_A_T,slep_F_T,storage_bits,wall_ms";

/// T rows of the primary protocol, one per task.
std::vector<std::string> runs_csv_rows(const RunRecord& record);
std::string sweep_csv_row(const RunRecord& record);

/// Appends lines to `path`, writing `header` first when the file is new or empty.
void append_lines(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& lines);

/// A_t and F_t series of one protocol.
struct Curve {
  std::vector<double> a;
  std::vector<double> f;
};

/// What a result file carries about one run.
struct RunSummary {
  std::string method;
  std::size_t tasks = 0;
  std::size_t codebook_size = 0;
  std::size_t predictor_layers = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  /// Reported protocol, and LEP/SLEP when the file has both.
  Curve primary;
  std::optional<Curve> lep, slep;
  /// False when only final values are known (sweep CSV).
  bool full_curves = true;
  /// Extra storage while training the final task.
  std::uint64_t storage_bits = 0;
};

/// Reads runs.jsonl, runs.csv or sweep.csv (detected from content). Throws
/// LookupError when the file is missing, ParseError when it is malformed or
/// holds no runs.
std::vector<RunSummary> load_results(const std::filesystem::path& path);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t n = 0;
};
Stat summarize(const std::vector<double>& values);

struct ReportRow {
  std::string label;  // method, plus K/L/lambda when one method has several settings
  std::size_t runs = 0;
  Stat a, f;  // primary protocol
  std::optional<Stat> lep_a, lep_f, slep_a, slep_f;
  Stat storage_bits;
};

/// One row per distinct (method, T, K, L, lambda), in first-seen order.
std::vector<ReportRow> aggregate(const std::vector<RunSummary>& runs);

/// Aligned text table: LEP and SLEP A_T, F_T when every row has both,
/// otherwise the primary protocol's, then storage.
std::string format_report(const std::vector<ReportRow>& rows);

/// Per-task mean/std curves of runs with full curves:
/// label,protocol,t,A_t_mean,A_t_std,F_t_mean,F_t_std,runs
std::string format_curves_csv(const std::vector<RunSummary>& runs);

}  // namespace decor
