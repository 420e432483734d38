#pragma once
// File-level commands behind the CLI. Each writes a run manifest before any
// output data; every output is written atomically.

#include "scicoe/error.hpp"
#include "scicoe/sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scicoe {

extern const char* const kArtifactVersion;

/// 0 success, 2 input/config, 3 consistency, 4 numerical degeneracy.
int exit_code_for(ErrorCode code) noexcept;

/// Per-solution r_sol and per-strategy anchored rewards. The manifest goes
/// to out_path + ".manifest.json".
void cmd_reward_stage1(const std::string& matrix_path, const std::string& labels_path, const std::string& out_path,
                       std::size_t jobs = 1);

/// Consensus solver rewards and geometric verifier rewards, plus the polar
/// geometry CSV. Only the reward settings and seed of `config` are used.
void cmd_reward_stage2(const std::string& matrix_path, const std::string& embeddings_path, const SimConfig& config,
                       const std::string& out_path, const std::string& geometry_csv_path, std::size_t jobs = 1);

/// Writes manifest.json, train_log.csv, config.resolved and policy.json into out_dir.
void cmd_simulate(const SimConfig& config, const std::string& out_dir);

/// One summary row per log. Writes to out_path when non-empty; returns the CSV.
std::string cmd_analyze(const std::vector<std::string>& log_paths, const std::string& out_path = {});

/// Re-executes the command recorded in a manifest, writing outputs with the
/// recorded file names into out_dir.
void cmd_rerun(const std::string& manifest_path, const std::string& out_dir);

}  // namespace scicoe
