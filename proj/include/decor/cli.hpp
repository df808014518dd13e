// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "decor/harness.hpp"

namespace decor {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Parses "K=8,16,32,64" and "L=1,2,3" terms. Axes left out keep the base
/// config's single value. Throws ConfigError naming the axis.
SweepGrid parse_grid(const std::vector<std::string>& terms, const ExperimentConfig& base);

/// Entry point of the decor_bench tool; args exclude the program name.
/// Returns 0 on success, 2 for configuration or usage errors, 1 otherwise.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace decor
