#pragma once

#include <functional>
#include <span>
#include <vector>

#include "linflow/features.hpp"

namespace linflow {

// Output of the backward-induction pass: the chosen first-page action, the
// conditional policy and continuation values for later pages, and the
// resulting display trajectory.
struct PlanResult {
    int best_first = 0;
    // policy[i][prev] = best action on page i (i >= 1) given prev shown on
    // page i-1; -1 where prev cannot occur. policy[0] is empty.
    std::vector<std::vector<int>> policy;
    // value[i][prev] = expected long-term reward of pages i..D-1 given prev.
    std::vector<std::vector<double>> value;
    double best_value = 0.0;
    std::vector<int> trajectory;
};

// Success probability for (page, prev, action); prev is ignored on page 0.
using SuccessFn = std::function<double(int page, int prev, int action)>;
// Feasible actions on `page` after `prev` (prev < 0 on page 0).
using FeasibleFn = std::function<std::vector<int>(int page, int prev)>;

// Core backward induction over an arbitrary success-probability table.
// For each page from the last down to the second and each feasible previous
// action, picks argmax of r + (1 - r) * value[next]; ties break to the
// lowest action index.
PlanResult plan(const FlowShape& shape, const FeasibleFn& feasible, const SuccessFn& success);

// Thompson-sampling plug-in: probabilities come from Phi(b.w / beta) under
// the per-page sampled weights.
PlanResult plan(const FlowShape& shape, std::span<const ModelForm> forms,
                std::span<const std::vector<double>> sampled_weights,
                const ContextEncoding& context, double beta);

// The expected long-term reward of the planned trajectory under the sampled
// weights (the value attached to the chosen first action).
double plan_value(const PlanResult& result);

}  // namespace linflow
