#include "linflow/planner.hpp"

#include <stdexcept>

#include "linflow/probit.hpp"

namespace linflow {

PlanResult plan(const FlowShape& shape, const FeasibleFn& feasible, const SuccessFn& success) {
    shape.validate();
    const int pages = shape.pages;
    PlanResult result;
    result.policy.resize(static_cast<std::size_t>(pages));
    result.value.resize(static_cast<std::size_t>(pages));

    // value[i][prev] starts from E[G | a_D] = 0 past the last page.
    std::vector<double> next_value(static_cast<std::size_t>(shape.candidates.back()), 0.0);
    for (int page = pages - 1; page >= 1; --page) {
        const int n_prev = shape.candidates[static_cast<std::size_t>(page - 1)];
        auto& policy = result.policy[static_cast<std::size_t>(page)];
        auto& value = result.value[static_cast<std::size_t>(page)];
        policy.assign(static_cast<std::size_t>(n_prev), -1);
        value.assign(static_cast<std::size_t>(n_prev), 0.0);
        for (int prev = 0; prev < n_prev; ++prev) {
            const std::vector<int> actions = feasible(page, prev);
            if (actions.empty()) {
                throw std::invalid_argument("plan: no feasible action on page " +
                                            std::to_string(page + 1));
            }
            double best = -1.0;
            int best_action = -1;
            for (int action : actions) {
                const double r = success(page, prev, action);
                const double continuation = page + 1 < pages ? next_value[static_cast<std::size_t>(action)] : 0.0;
                const double g = r + (1.0 - r) * continuation;
                if (g > best) {
                    best = g;
                    best_action = action;
                }
            }
            policy[static_cast<std::size_t>(prev)] = best_action;
            value[static_cast<std::size_t>(prev)] = best;
        }
        next_value = value;
    }

    const std::vector<int> first_actions = feasible(0, -1);
    if (first_actions.empty()) throw std::invalid_argument("plan: no feasible action on page 1");
    double best = -1.0;
    int best_action = -1;
    for (int action : first_actions) {
        const double r = success(0, -1, action);
        const double continuation = pages > 1 ? next_value[static_cast<std::size_t>(action)] : 0.0;
        const double g = r + (1.0 - r) * continuation;
        if (g > best) {
            best = g;
            best_action = action;
        }
    }
    result.best_first = best_action;
    result.best_value = best;

    result.trajectory.reserve(static_cast<std::size_t>(pages));
    result.trajectory.push_back(best_action);
    for (int page = 1; page < pages; ++page) {
        const int prev = result.trajectory.back();
        result.trajectory.push_back(result.policy[static_cast<std::size_t>(page)][static_cast<std::size_t>(prev)]);
    }
    return result;
}

PlanResult plan(const FlowShape& shape, std::span<const ModelForm> forms,
                std::span<const std::vector<double>> sampled_weights,
                const ContextEncoding& context, double beta) {
    if (static_cast<int>(forms.size()) != shape.pages ||
        static_cast<int>(sampled_weights.size()) != shape.pages) {
        throw std::invalid_argument("plan: need one form and one weight vector per page");
    }
    for (int page = 0; page < shape.pages; ++page) {
        if (static_cast<int>(sampled_weights[static_cast<std::size_t>(page)].size()) !=
            forms[static_cast<std::size_t>(page)].columns()) {
            throw std::invalid_argument("plan: sampled weights do not match form columns");
        }
    }
    auto feasible = [&](int page, int prev) {
        return forms[static_cast<std::size_t>(page)].feasible_actions(
            page == 0 ? std::nullopt : std::optional<int>(prev));
    };
    auto success = [&](int page, int prev, int action) {
        const auto& form = forms[static_cast<std::size_t>(page)];
        const double u = form.utility(context, page == 0 ? std::nullopt : std::optional<int>(prev),
                                      action, sampled_weights[static_cast<std::size_t>(page)]);
        return phi_cdf(u / beta);
    };
    return plan(shape, feasible, success);
}

double plan_value(const PlanResult& result) { return result.best_value; }

}  // namespace linflow
