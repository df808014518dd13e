// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/results.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "decor/errors.hpp"

namespace decor {

using nlohmann::json;

namespace {

json protocol_to_json(const ProtocolResult& p) {
  json rows = json::array();
  for (std::size_t t = 1; t <= p.matrix.tasks(); ++t) rows.push_back(p.matrix.row(t));
  return {{"matrix", rows}, {"A", p.average}, {"F", p.forgetting}};
}

ProtocolResult protocol_from_json(const json& doc, std::size_t tasks) {
  ProtocolResult p{AccuracyMatrix(tasks), doc.at("A").get<std::vector<double>>(), doc.at("F").get<std::vector<double>>()};
  const json& rows = doc.at("matrix");
  if (rows.size() != tasks || p.average.size() != tasks || p.forgetting.size() != tasks) {
    throw ParseError("protocol arrays do not match T", 0);
  }
  for (std::size_t t = 1; t <= tasks; ++t) {
    const auto row = rows[t - 1].get<std::vector<double>>();
    if (row.size() != t) throw ParseError("accuracy matrix row " + std::to_string(t) + " has the wrong length", 0);
    for (std::size_t j = 1; j <= t; ++j) p.matrix.set(t, j, row[j - 1]);
  }
  return p;
}

const char* protocol_name(ProbeMode mode) { return mode == ProbeMode::kLep ? "LEP" : "SLEP"; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    T value;
    if constexpr (std::is_floating_point_v<T>) {
      value = std::stod(text, &used);
    } else {
      value = static_cast<T>(std::stoull(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::logic_error&) {
    throw ParseError("bad number \"" + text + "\"", line);
  }
}

/// Column lookup by header name.
class CsvTable {
 public:
  CsvTable(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) index_[header[i]] = i;
  }
  bool has(const std::string& name) const { return index_.contains(name); }
  std::size_t width() const { return index_.size(); }
  const std::string& get(const std::vector<std::string>& row, const std::string& name) const {
    return row[index_.at(name)];
  }

 private:
  std::map<std::string, std::size_t> index_;
};

std::vector<RunSummary> load_jsonl(std::istream& in) {
  std::vector<RunSummary> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (strip(line).empty()) continue;
    RunRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), number);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), number);
    }
    RunSummary s;
    s.method = std::string(to_string(r.method));
    s.tasks = r.tasks;
    s.codebook_size = r.codebook_size;
    s.predictor_layers = r.predictor_layers;
    s.lambda = r.lambda;
    s.seed = r.seed;
    s.lep = Curve{r.lep.average, r.lep.forgetting};
    s.slep = Curve{r.slep.average, r.slep.forgetting};
    s.primary = r.primary == ProbeMode::kLep ? *s.lep : *s.slep;
    s.storage_bits = r.storage_bits.empty() ? 0 : r.storage_bits.back();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RunSummary> load_csv(std::istream& in) {
  std::string line;
  std::getline(in, line);
  const CsvTable table(split_csv(strip(line)));
  const bool runs = table.has("t") && table.has("A_t") && table.has("F_t");
  const bool sweep = table.has("A_T") && table.has("F_T");
  for (const char* col : {"method", "T", "K", "L", "lambda", "seed", "storage_bits"}) {
    if (!table.has(col) || !(runs || sweep)) throw ParseError("unrecognized results header", 1);
  }

  std::vector<RunSummary> out;
  std::map<std::tuple<std::string, std::size_t, std::size_t, std::size_t, double, std::uint64_t>, std::size_t> where;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    line = strip(line);
    if (line.empty()) continue;
    const auto row = split_csv(line);
    if (row.size() != table.width()) {
      throw ParseError("expected " + std::to_string(table.width()) + " columns, found " + std::to_string(row.size()),
                       number);
    }
    if (line == (runs ? kRunsCsvHeader : kSweepCsvHeader)) continue;  // header repeated by an append
    RunSummary s;
    s.method = table.get(row, "method");
    if (!parse_method(s.method)) throw ParseError("unknown method \"" + s.method + "\"", number);
    s.tasks = parse_number<std::size_t>(table.get(row, "T"), number);
    s.codebook_size = parse_number<std::size_t>(table.get(row, "K"), number);
    s.predictor_layers = parse_number<std::size_t>(table.get(row, "L"), number);
    s.lambda = parse_number<double>(table.get(row, "lambda"), number);
    s.seed = parse_number<std::uint64_t>(table.get(row, "seed"), number);
    s.storage_bits = parse_number<std::uint64_t>(table.get(row, "storage_bits"), number);
    if (sweep) {
      s.full_curves = false;
      s.primary = Curve{{parse_number<double>(table.get(row, "A_T"), number)},
                        {parse_number<double>(table.get(row, "F_T"), number)}};
      if (table.has("lep_A_T") && table.has("slep_A_T")) {
        s.lep = Curve{{parse_number<double>(table.get(row, "lep_A_T"), number)},
                      {parse_number<double>(table.get(row, "lep_F_T"), number)}};
        s.slep = Curve{{parse_number<double>(table.get(row, "slep_A_T"), number)},
                       {parse_number<double>(table.get(row, "slep_F_T"), number)}};
      }
      out.push_back(std::move(s));
      continue;
    }
    const auto t = parse_number<std::size_t>(table.get(row, "t"), number);
    const auto key = std::make_tuple(s.method, s.tasks, s.codebook_size, s.predictor_layers, s.lambda, s.seed);
    auto it = where.find(key);
    if (it == where.end() || out[it->second].primary.a.size() >= s.tasks) {
      // A fresh run, or the same settings appended again by a later invocation.
      where[key] = out.size();
      out.push_back(s);
      it = where.find(key);
    }
    RunSummary& run = out[it->second];
    if (t != run.primary.a.size() + 1) throw ParseError("task index out of order", number);
    run.primary.a.push_back(parse_number<double>(table.get(row, "A_t"), number));
    run.primary.f.push_back(parse_number<double>(table.get(row, "F_t"), number));
    run.storage_bits = s.storage_bits;
  }
  for (const RunSummary& s : out) {
    if (s.primary.a.size() != s.tasks) throw ParseError("run of method " + s.method + " is missing task rows", number);
  }
  return out;
}

using GroupKey = std::tuple<std::string, std::size_t, std::size_t, std::size_t, double>;

GroupKey group_key(const RunSummary& s) {
  return {s.method, s.tasks, s.codebook_size, s.predictor_layers, s.lambda};
}

/// Groups in first-seen order, each with its display label.
std::vector<std::pair<std::string, std::vector<const RunSummary*>>> group_runs(const std::vector<RunSummary>& runs) {
  std::vector<GroupKey> keys;
  std::map<GroupKey, std::vector<const RunSummary*>> members;
  std::map<std::string, std::size_t> settings_per_method;
  for (const RunSummary& s : runs) {
    const GroupKey key = group_key(s);
    if (!members.contains(key)) {
      keys.push_back(key);
      ++settings_per_method[s.method];
    }
    members[key].push_back(&s);
  }
  std::vector<std::pair<std::string, std::vector<const RunSummary*>>> out;
  for (const GroupKey& key : keys) {
    const auto& [method, tasks, k, l, lambda] = key;
    std::string label = method;
    if (settings_per_method[method] > 1) label += fmt::format(" T={} K={} L={} lambda={}", tasks, k, l, lambda);
    out.emplace_back(std::move(label), members[key]);
  }
  return out;
}

std::string format_bytes(double bits) {
  const double bytes = bits / 8.0;
  if (bytes < 1024.0) return fmt::format("{:.0f} B", bytes);
  if (bytes < 1024.0 * 1024.0) return fmt::format("{:.1f} KiB", bytes / 1024.0);
  return fmt::format("{:.2f} MiB", bytes / (1024.0 * 1024.0));
}

std::string pm(const Stat& s) { return fmt::format("{:.2f} ± {:.2f}", s.mean, s.std); }

}  // namespace

json record_to_json(const RunRecord& r) {
  return {{"config_hash", r.config_hash},
          {"seed", r.seed},
          {"method", std::string(to_string(r.method))},
          {"T", r.tasks},
          {"K", r.codebook_size},
          {"L", r.predictor_layers},
          {"lambda", r.lambda},
          {"protocol", protocol_name(r.primary)},
          {"lep", protocol_to_json(r.lep)},
          {"slep", protocol_to_json(r.slep)},
          {"storage_bits", r.storage_bits},
          {"decor_state_bytes", r.decor_state_bytes},
          {"teacher_bytes", r.teacher_bytes},
          {"train_loss", r.train_loss},
          {"distill_loss", r.distill_loss},
          {"decor_states", r.decor_states},
          {"events", r.events},
          {"wall_ms", r.wall_ms}};
}

RunRecord record_from_json(const json& doc) {
  try {
    RunRecord r;
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    const auto method = parse_method(doc.at("method").get<std::string>());
    if (!method) throw ParseError("unknown method", 0);
    r.method = *method;
    r.tasks = doc.at("T").get<std::size_t>();
    r.codebook_size = doc.at("K").get<std::size_t>();
    r.predictor_layers = doc.at("L").get<std::size_t>();
    r.lambda = doc.at("lambda").get<double>();
    const std::string protocol = doc.at("protocol").get<std::string>();
    if (protocol != "LEP" && protocol != "SLEP") throw ParseError("unknown protocol", 0);
    r.primary = protocol == "LEP" ? ProbeMode::kLep : ProbeMode::kSlep;
    r.lep = protocol_from_json(doc.at("lep"), r.tasks);
    r.slep = protocol_from_json(doc.at("slep"), r.tasks);
    r.storage_bits = doc.at("storage_bits").get<std::vector<std::uint64_t>>();
    r.decor_state_bytes = doc.at("decor_state_bytes").get<std::vector<std::uint64_t>>();
    r.teacher_bytes = doc.at("teacher_bytes").get<std::vector<std::uint64_t>>();
    r.train_loss = doc.at("train_loss").get<std::vector<double>>();
    r.distill_loss = doc.at("distill_loss").get<std::vector<double>>();
    r.decor_states = doc.at("decor_states").get<std::size_t>();
    r.events = doc.at("events").get<std::vector<std::string>>();
    r.wall_ms = doc.at("wall_ms").get<double>();
    if (r.storage_bits.size() != r.tasks) throw ParseError("storage_bits does not match T", 0);
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed run record: ") + e.what(), 0);
  } catch (const Error& e) {
    if (dynamic_cast<const ParseError*>(&e) != nullptr) throw;
    throw ParseError(std::string("malformed run record: ") + e.what(), 0);
  }
}

std::string record_fingerprint(const RunRecord& record) {
  json doc = record_to_json(record);
  doc.erase("wall_ms");
  return doc.dump();
}

std::vector<std::string> runs_csv_rows(const RunRecord& r) {
  const ProtocolResult& p = r.primary_result();
  std::vector<std::string> rows;
  for (std::size_t t = 1; t <= r.tasks; ++t) {
    rows.push_back(fmt::format("{},{},{},{},{},{},{},{},{},{},{}", to_string(r.method), r.tasks, r.codebook_size,
                               r.predictor_layers, r.lambda, r.seed, t, p.average[t - 1], p.forgetting[t - 1],
                               r.storage_bits[t - 1], r.wall_ms));
  }
  return rows;
}

std::string sweep_csv_row(const RunRecord& r) {
  const ProtocolResult& p = r.primary_result();
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", to_string(r.method), r.tasks, r.codebook_size,
                     r.predictor_layers, r.lambda, r.seed, protocol_name(r.primary), p.average.back(),
                     p.forgetting.back(), r.lep.average.back(), r.lep.forgetting.back(), r.slep.average.back(),
                     r.slep.forgetting.back(), r.storage_bits.back(), r.wall_ms);
}

void append_lines(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& lines) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write " + path.string());
  if (fresh && !header.empty()) out << header << '\n';
  for (const std::string& line : lines) out << line << '\n';
  if (!out) throw Error("write to " + path.string() + " failed");
}

std::vector<RunSummary> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("results file not found: " + path.string());
  const int first = in.peek();
  std::vector<RunSummary> runs = first == '{' ? load_jsonl(in) : first == EOF ? std::vector<RunSummary>{} : load_csv(in);
  if (runs.empty()) throw ParseError("no runs in " + path.string(), 1);
  return runs;
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<ReportRow> aggregate(const std::vector<RunSummary>& runs) {
  std::vector<ReportRow> rows;
  for (const auto& [label, members] : group_runs(runs)) {
    ReportRow row;
    row.label = label;
    row.runs = members.size();
    std::vector<double> a, f, la, lf, sa, sf, storage;
    bool both = true;
    for (const RunSummary* s : members) {
      a.push_back(s->primary.a.back());
      f.push_back(s->primary.f.back());
      storage.push_back(static_cast<double>(s->storage_bits));
      if (s->lep && s->slep) {
        la.push_back(s->lep->a.back());
        lf.push_back(s->lep->f.back());
        sa.push_back(s->slep->a.back());
        sf.push_back(s->slep->f.back());
      } else {
        both = false;
      }
    }
    row.a = summarize(a);
    row.f = summarize(f);
    row.storage_bits = summarize(storage);
    if (both) {
      row.lep_a = summarize(la);
      row.lep_f = summarize(lf);
      row.slep_a = summarize(sa);
      row.slep_f = summarize(sf);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  const bool both = std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.lep_a.has_value(); });
  std::vector<std::vector<std::string>> table;
  if (both) {
    table.push_back({"method", "runs", "LEP A_T", "LEP F_T", "SLEP A_T", "SLEP F_T", "storage"});
  } else {
    table.push_back({"method", "runs", "A_T", "F_T", "storage"});
  }
  for (const ReportRow& r : rows) {
    std::vector<std::string> cells{r.label, std::to_string(r.runs)};
    if (both) {
      for (const auto* s : {&*r.lep_a, &*r.lep_f, &*r.slep_a, &*r.slep_f}) cells.push_back(pm(*s));
    } else {
      cells.push_back(pm(r.a));
      cells.push_back(pm(r.f));
    }
    cells.push_back(format_bytes(r.storage_bits.mean));
    table.push_back(std::move(cells));
  }

  std::vector<std::size_t> width(table.front().size(), 0);
  const auto display_width = [](const std::string& s) {
    // "±" is two bytes of UTF-8 but one column.
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  };
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::string out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table[r].size(); ++c) {
      const std::string& cell = table[r][c];
      const std::string pad(width[c] - display_width(cell), ' ');
      out += c == 0 ? cell + pad : "  " + pad + cell;
    }
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out += std::string(total - 2, '-') + '\n';
    }
  }
  return out;
}

std::string format_curves_csv(const std::vector<RunSummary>& runs) {
  std::string out = "label,protocol,t,A_t_mean,A_t_std,F_t_mean,F_t_std,runs\n";
  for (const auto& [label, members] : group_runs(runs)) {
    std::vector<const RunSummary*> full;
    for (const RunSummary* s : members) {
      if (s->full_curves) full.push_back(s);
    }
    if (full.empty()) continue;
    const bool both = std::all_of(full.begin(), full.end(), [](const RunSummary* s) { return s->lep && s->slep; });
    std::vector<std::pair<std::string, const Curve* (*)(const RunSummary*)>> protocols;
    if (both) {
      protocols.emplace_back("LEP", [](const RunSummary* s) -> const Curve* { return &*s->lep; });
      protocols.emplace_back("SLEP", [](const RunSummary* s) -> const Curve* { return &*s->slep; });
    } else {
      protocols.emplace_back("primary", [](const RunSummary* s) -> const Curve* { return &s->primary; });
    }
    for (const auto& [name, pick] : protocols) {
      for (std::size_t t = 1; t <= full.front()->tasks; ++t) {
        std::vector<double> a, f;
        for (const RunSummary* s : full) {
          a.push_back(pick(s)->a[t - 1]);
          f.push_back(pick(s)->f[t - 1]);
        }
        const Stat sa = summarize(a);
        const Stat sf = summarize(f);
        out += fmt::format("{},{},{},{},{},{},{},{}\n", label, name, t, sa.mean, sa.std, sf.mean, sf.std, full.size());
      }
    }
  }
  return out;
}

}  // namespace decor
