#pragma once
// Flat "key = value" configuration covering the environment, reward,
// training and schedule settings. Lines starting with '#' are comments.
//
// Archetypes are given as indexed keys, one per line:
//   archetype.0 = tpr, tnr_focus, tnr_off, focus, sigma
// Any archetype key replaces the whole built-in table; indices must be
// contiguous from 0.

#include "scicoe/sim.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scicoe {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

SimConfig parse_config(std::string_view text);

/// Reads a config file, or the config snapshot of a run manifest (JSON).
SimConfig load_config_file(const std::string& path);

/// Applies one override; throws ConfigError for unknown keys or bad values.
void set_config_value(SimConfig& config, std::string_view key, std::string_view value);

/// Every resolved setting in a fixed order, values formatted to round-trip.
ConfigEntries config_entries(const SimConfig& config);

std::string format_config(const SimConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace scicoe
