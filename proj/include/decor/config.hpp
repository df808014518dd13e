// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "decor/experiment.hpp"

namespace decor {

/// Builds a config from its JSON form (schema in docs/config.md). Missing keys
/// keep their defaults, unknown keys are rejected. A relative data.path is
/// resolved against `base_dir`. Throws ConfigError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and validates a config file. DECOR_RESULTS_DIR, when set and
/// non-empty, replaces output_dir. Throws ConfigError (key "config" for an
/// unreadable or malformed file).
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full JSON form; config_from_json(config_to_json(c)) == c field for field.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical JSON without seeds and output_dir.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace decor
