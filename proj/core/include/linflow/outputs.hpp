#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "linflow/agents.hpp"
#include "linflow/harness.hpp"
#include "linflow/sim.hpp"

namespace linflow {

// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double value);

// Writes regret.csv (agent,run,batch,cumulative_regret) and summary.csv
// (agent,batch,mean_cumulative_regret,stderr) into `dir`, overwriting any
// previous files. Identical inputs produce byte-identical files.
void emit_outputs(const RegretSeries& series, const std::filesystem::path& dir);

// Writes plot_pages.csv or plot_alpha2.csv: one row per (agent, axis value)
// with the final mean cumulative regret and its standard error.
void emit_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

// Audit dumps, one file set per run.
void write_ground_truth_dump(const GroundTruth& gt, const std::vector<ContextEncoding>& encodings,
                             const std::vector<double>& oracle_values,
                             const std::vector<std::vector<int>>& oracle_trajectories,
                             const std::filesystem::path& dir, int run);
void write_run_state_dump(const std::vector<std::unique_ptr<Agent>>& agents,
                          const std::filesystem::path& dir, int run);

}  // namespace linflow
