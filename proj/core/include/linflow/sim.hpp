#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "linflow/features.hpp"
#include "linflow/rng.hpp"

namespace linflow {

// Where the customer is in the flow. Start carries no page; AtPage(i) means
// page i (0-based, >= 1) is about to be shown after prev_action; Exit and
// End are terminal (success and no-success respectively).
struct FlowState {
    enum class Kind { start, at_page, exit_success, end_no_success };
    Kind kind = Kind::start;
    int page = -1;
    int prev_action = -1;

    static FlowState start() { return {Kind::start, -1, -1}; }
    static FlowState at_page(int page, int prev_action);
    static FlowState exit_success() { return {Kind::exit_success, -1, -1}; }
    static FlowState end_no_success() { return {Kind::end_no_success, -1, -1}; }
    bool terminal() const { return kind == Kind::exit_success || kind == Kind::end_no_success; }
};

// One realized pass through the flow.
struct StepOutcome {
    std::vector<std::pair<int, int>> presented;  // (page, action), 0-based
    std::vector<int> rewards;                    // R_i per presented page
    int g = 0;                                   // realized long-term reward
    FlowState terminal;
};

// The data generator: per-page weight vectors over the generator layout with
// the importance multipliers alpha1 (current action + context main), alpha_c
// (previous action) and alpha2 (interactions) folded into effective weights,
// and the probit scale beta_gen = 1 + alpha1 + alpha_c + alpha2.
struct GroundTruth {
    FlowShape shape;
    ContextSchema ctx;
    double alpha1 = 1.0;
    double alpha_c = 1.0;
    double alpha2 = 2.0;
    double beta_gen = 5.0;
    double base_rate = 0.1;
    std::vector<ModelForm> forms;              // generator term structure per page
    std::vector<std::vector<double>> weights;  // raw Normal draws (intercept shifted)
    std::vector<std::vector<double>> scaled;   // weights with alpha multipliers applied

    double success_prob(int page, const ContextEncoding& context, std::optional<int> prev,
                        int action) const;
};

// Samples fresh ground-truth weights: every coordinate Normal(0,1) except the
// page intercepts, which are Normal(phi_inv(base_rate) * beta_gen, 1).
GroundTruth sample_ground_truth(const FlowShape& shape, const ContextSchema& ctx, double alpha1,
                                double alpha_c, double alpha2, double base_rate, Rng& rng);

// E[G] of a full trajectory: r_1 + (1-r_1) r_2 + ... over the per-page
// success probabilities.
double expected_g(const GroundTruth& gt, const ContextEncoding& context,
                  std::span<const int> trajectory);

// Exhaustive argmax of expected_g over all feasible trajectories. Guarded
// against combinatorial blowup (> 1e6 trajectories throws).
std::pair<std::vector<int>, double> oracle_best(const GroundTruth& gt,
                                                const ContextEncoding& context,
                                                const FlowConstraints& constraints);

// Plays the trajectory: Bernoulli success draw per page, stopping at the
// first success (Exit) or running off the last page (End).
StepOutcome realize(const GroundTruth& gt, const ContextEncoding& context,
                    std::span<const int> trajectory, Rng& rng);

}  // namespace linflow
