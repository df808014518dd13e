// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#include "decor/experiment.hpp"

#include <cmath>

#include "decor/errors.hpp"

namespace decor {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::kFinetune:
      return "finetune";
    case Method::kDecor:
      return "decor";
    case Method::kLwf:
      return "lwf";
    case Method::kSimclr:
      return "simclr";
    case Method::kSimclrDecor:
      return "simclr+decor";
    case Method::kSimclrLwf:
      return "simclr+lwf";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : {Method::kFinetune, Method::kDecor, Method::kLwf, Method::kSimclr, Method::kSimclrDecor,
                   Method::kSimclrLwf}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

bool uses_codebook(Method method) noexcept { return method == Method::kDecor || method == Method::kSimclrDecor; }

bool uses_teacher(Method method) noexcept { return method == Method::kLwf || method == Method::kSimclrLwf; }

bool is_contrastive(Method method) noexcept {
  return method == Method::kSimclr || method == Method::kSimclrDecor || method == Method::kSimclrLwf;
}

namespace {

void require_positive(std::size_t v, const char* key) {
  if (v < 1) throw ConfigError("must be >= 1", key);
}

void require_finite_non_negative(double v, const char* key) {
  if (!std::isfinite(v) || v < 0.0) throw ConfigError("must be a finite number >= 0", key);
}

}  // namespace

void ExperimentConfig::validate() const {
  require_positive(tasks, "T");
  if (uses_codebook(method)) {
    if (codebook_size < 2) throw ConfigError("must be >= 2 for method " + std::string(to_string(method)), "K");
    require_positive(predictor_layers, "L");
  }
  require_positive(predictor_hidden, "predictor_hidden");
  require_finite_non_negative(lambda, "lambda");
  require_finite_non_negative(lwf_lambda, "lwf_lambda");
  if (!(lwf_temperature > 0.0) || !std::isfinite(lwf_temperature)) throw ConfigError("must be > 0", "lwf_temperature");
  if (!(nt_xent_temperature > 0.0) || !std::isfinite(nt_xent_temperature)) {
    throw ConfigError("must be > 0", "nt_xent_temperature");
  }
  for (std::size_t h : encoder_hidden) {
    if (h < 1) throw ConfigError("hidden widths must be >= 1", "model.encoder_hidden");
  }
  require_positive(feature_dim, "model.feature_dim");
  require_positive(projector_hidden, "model.projector_hidden");
  require_positive(projector_dim, "model.projector_dim");
  require_positive(epochs_per_task, "epochs_per_task");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("must be > 0", "lr");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("must lie in [0, 1)", "train.momentum");
  require_finite_non_negative(weight_decay, "train.weight_decay");
  require_positive(batch_size, "train.batch_size");
  if (is_contrastive(method) && batch_size < 2) throw ConfigError("contrastive methods need >= 2", "train.batch_size");
  augment.validate();
  probe.validate();
  require_positive(kmeans_max_iters, "kmeans.max_iters");
  require_finite_non_negative(kmeans_tol, "kmeans.tol");
  require_positive(kmeans_restarts, "kmeans.restarts");
  if (!feature_file) {
    synthetic.validate();
    if (synthetic.num_classes % tasks != 0) {
      throw ConfigError(std::to_string(synthetic.num_classes) + " classes cannot be split evenly into " +
                            std::to_string(tasks) + " tasks",
                        "T");
    }
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required", "seeds");
}

}  // namespace decor
