// Copyright 2026 The miaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mia/harness.hpp"

namespace mia {

// Experiment configs travel as dotted key=value lines, e.g.
//   target.epochs=200
//   calibration.mode=forgetting
// Precedence is decided by entry order: later entries win. The CLI stacks
// environment, config file, then flags.

using KeyValueList = std::vector<std::pair<std::string, std::string>>;

/// Parses key=value lines; '#' starts a comment and blank lines are skipped.
KeyValueList parse_config_text(std::istream& in);

KeyValueList read_config_file(const std::string& path);

/// Entries from the process environment (currently MIAUDIT_BASE_SEED).
KeyValueList env_config_entries();

/// Builds a config from defaults overlaid with `entries` in order. The
/// reference training config follows the target one unless reference.* keys
/// are given explicitly; in forgetting mode the derived epoch budget is a
/// quarter of the target's. Throws ConfigError on unknown keys, malformed
/// values, or invalid field combinations.
ExperimentConfig build_experiment_config(const KeyValueList& entries);

/// Canonical, fully materialized serialization; parsing it back rebuilds an
/// equivalent config.
KeyValueList config_to_key_values(const ExperimentConfig& cfg);

/// Formatting helpers shared by config and report serialization: shortest
/// round-trip representation for doubles.
std::string format_double(double v);
double parse_double_str(const std::string& s, const std::string& what);
std::uint64_t parse_u64(const std::string& s, const std::string& what);

}  // namespace mia
