// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <type_traits>

#include <fmt/format.h>

#include "decor/errors.hpp"
#include "decor/rng.hpp"

namespace decor {

using nlohmann::json;

namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>);

/// Reads one JSON object, tracking which keys were consumed so leftovers can
/// be reported by their dotted path.
class Section {
 public:
  Section(const json& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {
    if (!node_.is_object()) throw ConfigError("must be an object", prefix_.empty() ? "config" : prefix_);
  }

  std::string key(const std::string& name) const { return prefix_.empty() ? name : prefix_ + "." + name; }

  const json* find(const std::string& name) {
    seen_.insert(name);
    const auto it = node_.find(name);
    return it == node_.end() ? nullptr : &*it;
  }

  void read(const std::string& name, std::uint64_t& out) {
    if (const json* v = find(name)) out = as_size(*v, key(name));
  }

  void read(const std::string& name, double& out) {
    if (const json* v = find(name)) {
      if (!v->is_number()) throw ConfigError("must be a number", key(name));
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError("must be finite", key(name));
    }
  }

  void read(const std::string& name, bool& out) {
    if (const json* v = find(name)) {
      if (!v->is_boolean()) throw ConfigError("must be true or false", key(name));
      out = v->get<bool>();
    }
  }

  void read(const std::string& name, std::string& out) {
    if (const json* v = find(name)) {
      if (!v->is_string()) throw ConfigError("must be a string", key(name));
      out = v->get<std::string>();
    }
  }

  void read(const std::string& name, std::vector<std::size_t>& out) {
    if (const json* v = find(name)) {
      if (!v->is_array()) throw ConfigError("must be a list of integers", key(name));
      out.clear();
      for (const json& item : *v) out.push_back(as_size(item, key(name)));
    }
  }

  void reject_unknown() const {
    for (const auto& [name, value] : node_.items()) {
      if (!seen_.contains(name)) throw ConfigError("unknown key", key(name));
    }
  }

  static std::uint64_t as_size(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) throw ConfigError("must be a non-negative integer", key);
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d == std::floor(d) && d < 9.007199254740992e15) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError("must be a non-negative integer", key);
  }

 private:
  const json& node_;
  std::string prefix_;
  std::set<std::string> seen_;
};

ProbeMode parse_probe_mode(const std::string& text) {
  if (text == "LEP" || text == "lep") return ProbeMode::kLep;
  if (text == "SLEP" || text == "slep") return ProbeMode::kSlep;
  throw ConfigError("must be \"LEP\" or \"SLEP\"", "probe.mode");
}

}  // namespace

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  Section top(doc, "");

  if (const json* m = top.find("method")) {
    if (!m->is_string()) throw ConfigError("must be a string", "method");
    const auto method = parse_method(m->get<std::string>());
    if (!method) throw ConfigError("unknown method \"" + m->get<std::string>() + "\"", "method");
    cfg.method = *method;
  }
  top.read("T", cfg.tasks);
  top.read("K", cfg.codebook_size);
  top.read("L", cfg.predictor_layers);
  top.read("lambda", cfg.lambda);
  top.read("predictor_hidden", cfg.predictor_hidden);
  top.read("lwf_lambda", cfg.lwf_lambda);
  top.read("lwf_temperature", cfg.lwf_temperature);
  top.read("nt_xent_temperature", cfg.nt_xent_temperature);
  top.read("epochs_per_task", cfg.epochs_per_task);
  top.read("lr", cfg.lr);
  if (const json* s = top.find("seeds")) {
    if (s->is_array()) {
      cfg.seeds.clear();
      for (const json& item : *s) cfg.seeds.push_back(Section::as_size(item, "seeds"));
    } else {
      cfg.seeds = {Section::as_size(*s, "seeds")};
    }
  }
  if (const json* out = top.find("output_dir")) {
    if (!out->is_string() || out->get<std::string>().empty()) throw ConfigError("must be a path", "output_dir");
    cfg.output_dir = out->get<std::string>();
  }

  if (const json* node = top.find("train")) {
    Section s(*node, "train");
    s.read("momentum", cfg.momentum);
    s.read("weight_decay", cfg.weight_decay);
    s.read("batch_size", cfg.batch_size);
    s.reject_unknown();
  }
  if (const json* node = top.find("model")) {
    Section s(*node, "model");
    s.read("encoder_hidden", cfg.encoder_hidden);
    s.read("feature_dim", cfg.feature_dim);
    s.read("projector_hidden", cfg.projector_hidden);
    s.read("projector_dim", cfg.projector_dim);
    s.reject_unknown();
  }
  if (const json* node = top.find("augment")) {
    Section s(*node, "augment");
    s.read("noise_sigma", cfg.augment.noise_sigma);
    s.read("mask_fraction", cfg.augment.mask_fraction);
    s.read("seed", cfg.augment.seed);
    s.reject_unknown();
  }
  if (const json* node = top.find("probe")) {
    Section s(*node, "probe");
    std::string mode;
    s.read("mode", mode);
    if (!mode.empty()) cfg.probe.mode = parse_probe_mode(mode);
    s.read("samples_per_task", cfg.probe.samples_per_task);
    s.read("epochs", cfg.probe.epochs);
    s.read("lr", cfg.probe.lr);
    s.read("batch_size", cfg.probe.batch_size);
    s.read("standardize", cfg.probe.standardize);
    s.read("seed", cfg.probe.seed);
    s.reject_unknown();
  }
  if (const json* node = top.find("kmeans")) {
    Section s(*node, "kmeans");
    s.read("max_iters", cfg.kmeans_max_iters);
    s.read("tol", cfg.kmeans_tol);
    s.read("restarts", cfg.kmeans_restarts);
    s.reject_unknown();
  }
  if (const json* node = top.find("data")) {
    Section s(*node, "data");
    std::string source = "synthetic";
    s.read("source", source);
    if (source == "synthetic") {
      s.read("num_classes", cfg.synthetic.num_classes);
      s.read("feature_dim", cfg.synthetic.feature_dim);
      s.read("samples_per_class", cfg.synthetic.samples_per_class);
      s.read("class_separation", cfg.synthetic.class_separation);
      s.read("within_class_sigma", cfg.synthetic.within_class_sigma);
      s.read("drift_sigma", cfg.synthetic.drift_sigma);
      s.read("test_fraction", cfg.synthetic.test_fraction);
      s.read("seed", cfg.synthetic.seed);
    } else if (source == "file") {
      std::string path;
      s.read("path", path);
      if (path.empty()) throw ConfigError("required when data.source is \"file\"", "data.path");
      std::filesystem::path p(path);
      cfg.feature_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else {
      throw ConfigError("must be \"synthetic\" or \"file\"", "data.source");
    }
    s.reject_unknown();
  }
  top.reject_unknown();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string(), "config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what(), "config");
  }
  ExperimentConfig cfg = config_from_json(doc, path.parent_path());
  if (const char* dir = std::getenv("DECOR_RESULTS_DIR"); dir != nullptr && *dir != '\0') cfg.output_dir = dir;
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["method"] = std::string(to_string(cfg.method));
  doc["T"] = cfg.tasks;
  doc["K"] = cfg.codebook_size;
  doc["L"] = cfg.predictor_layers;
  doc["lambda"] = cfg.lambda;
  doc["predictor_hidden"] = cfg.predictor_hidden;
  doc["lwf_lambda"] = cfg.lwf_lambda;
  doc["lwf_temperature"] = cfg.lwf_temperature;
  doc["nt_xent_temperature"] = cfg.nt_xent_temperature;
  doc["epochs_per_task"] = cfg.epochs_per_task;
  doc["lr"] = cfg.lr;
  doc["seeds"] = cfg.seeds;
  doc["output_dir"] = cfg.output_dir.string();
  doc["train"] = {{"momentum", cfg.momentum}, {"weight_decay", cfg.weight_decay}, {"batch_size", cfg.batch_size}};
  doc["model"] = {{"encoder_hidden", cfg.encoder_hidden},
                  {"feature_dim", cfg.feature_dim},
                  {"projector_hidden", cfg.projector_hidden},
                  {"projector_dim", cfg.projector_dim}};
  doc["augment"] = {{"noise_sigma", cfg.augment.noise_sigma},
                    {"mask_fraction", cfg.augment.mask_fraction},
                    {"seed", cfg.augment.seed}};
  doc["probe"] = {{"mode", cfg.probe.mode == ProbeMode::kLep ? "LEP" : "SLEP"},
                  {"samples_per_task", cfg.probe.samples_per_task},
                  {"epochs", cfg.probe.epochs},
                  {"lr", cfg.probe.lr},
                  {"batch_size", cfg.probe.batch_size},
                  {"standardize", cfg.probe.standardize},
                  {"seed", cfg.probe.seed}};
  doc["kmeans"] = {{"max_iters", cfg.kmeans_max_iters}, {"tol", cfg.kmeans_tol}, {"restarts", cfg.kmeans_restarts}};
  if (cfg.feature_file) {
    doc["data"] = {{"source", "file"}, {"path", cfg.feature_file->string()}};
  } else {
    const SyntheticConfig& s = cfg.synthetic;
    doc["data"] = {{"source", "synthetic"},
                   {"num_classes", s.num_classes},
                   {"feature_dim", s.feature_dim},
                   {"samples_per_class", s.samples_per_class},
                   {"class_separation", s.class_separation},
                   {"within_class_sigma", s.within_class_sigma},
                   {"drift_sigma", s.drift_sigma},
                   {"test_fraction", s.test_fraction},
                   {"seed", s.seed}};
  }
  return doc;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json doc = config_to_json(cfg);
  doc.erase("seeds");
  doc.erase("output_dir");
  return fmt::format("{:016x}", fnv1a(doc.dump()));
}

}  // namespace decor
