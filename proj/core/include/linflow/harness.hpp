#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "linflow/agents.hpp"
#include "linflow/features.hpp"

namespace linflow {

enum class RegretMode { realized, expected };

struct ExperimentConfig {
    FlowShape shape{3, {3, 3, 3}};
    ContextSchema ctx{};
    FlowConstraints constraints{};
    double alpha1 = 1.0;
    double alpha_c = 1.0;
    double alpha2 = 2.0;
    double base_rate = 0.1;
    int steps = 14000;
    int batch_size = 1000;
    int runs = 100;
    std::vector<AgentKind> agents{AgentKind::mdp_with_bandits, AgentKind::interaction_bandits,
                                  AgentKind::independent_bandits, AgentKind::q_learning};
    BanditOptions bandit_options{};
    QLearnerConfig q_config{};
    std::uint64_t seed = 1;
    RegretMode regret_mode = RegretMode::realized;
    bool dump_ground_truth = false;
    bool dump_run_state = false;
    int workers = 0;  // 0: use hardware concurrency

    int batches() const { return steps / batch_size; }
    void validate() const;
};

// Batch-size-normalised cumulative regret per agent: one series per run plus
// run-averaged means. Both the realized and the expected-G variants are kept;
// `mode` selects which one file emission reports.
struct AgentSeries {
    AgentKind kind;
    std::vector<std::vector<double>> realized;  // [run][batch], cumulative
    std::vector<std::vector<double>> expected;  // [run][batch], cumulative

    const std::vector<std::vector<double>>& per_run(RegretMode mode) const {
        return mode == RegretMode::realized ? realized : expected;
    }
};

struct RegretSeries {
    int runs = 0;
    int batches = 0;
    int batch_size = 0;
    RegretMode mode = RegretMode::realized;
    std::vector<AgentSeries> agents;

    const AgentSeries& agent(AgentKind kind) const;
    std::vector<double> mean(AgentKind kind, RegretMode mode) const;
    std::vector<double> stderr_(AgentKind kind, RegretMode mode) const;
    double final_mean(AgentKind kind) const { return mean(kind, mode).back(); }
    double final_stderr(AgentKind kind) const { return stderr_(kind, mode).back(); }
};

std::vector<double> mean_over_runs(const std::vector<std::vector<double>>& per_run);
std::vector<double> stderr_over_runs(const std::vector<std::vector<double>>& per_run);

// Cumulative per-batch series from one run's per-step regrets, divided by
// the batch size.
std::vector<double> cumulative_batches(std::span<const double> per_step_regret, int batch_size);

// Per-step record for the standalone regret computation: the oracle's best
// expected long-term reward for that impression's context, and the agent's
// long-term reward (realized or expected, per the caller's mode).
struct StepRecord {
    double oracle;
    double g;
};

// Applies the regret statistic to explicit records. records[a][j] holds run
// j's per-step values for agent a; all runs must cover exactly `steps`.
RegretSeries regret(const ExperimentConfig& cfg,
                    const std::vector<std::vector<std::vector<StepRecord>>>& records);

// The full simulation protocol: per run, sample a ground truth, compute the
// per-context oracle, stream impressions to every configured agent (common
// context draws, independent selection/reward streams), update at batch
// boundaries, and aggregate Eq.-7 regret over runs. Runs execute in parallel
// across the configured worker count; results are independent of it.
RegretSeries run_experiment(const ExperimentConfig& cfg,
                            const std::optional<std::filesystem::path>& dump_dir = {});

struct SweepAxis {
    enum class Kind { pages, alpha2 };
    Kind kind = Kind::pages;
    std::vector<double> values;
};

struct SweepPoint {
    double value;
    RegretSeries series;
};

struct SweepResult {
    SweepAxis::Kind kind;
    std::vector<SweepPoint> points;
};

// One full experiment per grid point. The pages axis rebuilds the shape with
// the base per-page candidate count; the alpha2 axis rescales interaction
// strength only.
SweepResult sweep(const ExperimentConfig& base, const SweepAxis& axis);

}  // namespace linflow
