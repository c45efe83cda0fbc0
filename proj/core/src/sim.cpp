#include "linflow/sim.hpp"

#include <stdexcept>

#include "linflow/probit.hpp"

namespace linflow {

FlowState FlowState::at_page(int page, int prev_action) {
    if (page < 1) throw std::invalid_argument("FlowState: at_page needs page >= 2");
    if (prev_action < 0) throw std::invalid_argument("FlowState: at_page needs the previous action");
    return {Kind::at_page, page, prev_action};
}

double GroundTruth::success_prob(int page, const ContextEncoding& context, std::optional<int> prev,
                                 int action) const {
    const auto& form = forms[static_cast<std::size_t>(page)];
    const double u = form.utility(context, prev, action, scaled[static_cast<std::size_t>(page)]);
    return phi_cdf(u / beta_gen);
}

GroundTruth sample_ground_truth(const FlowShape& shape, const ContextSchema& ctx, double alpha1,
                                double alpha_c, double alpha2, double base_rate, Rng& rng) {
    shape.validate();
    ctx.validate();
    if (!(base_rate > 0.0 && base_rate < 1.0)) {
        throw std::invalid_argument("sample_ground_truth: base_rate must lie in (0, 1)");
    }
    if (alpha1 < 0.0 || alpha_c < 0.0 || alpha2 < 0.0) {
        throw std::invalid_argument("sample_ground_truth: alphas must be >= 0");
    }

    GroundTruth gt;
    gt.shape = shape;
    gt.ctx = ctx;
    gt.alpha1 = alpha1;
    gt.alpha_c = alpha_c;
    gt.alpha2 = alpha2;
    gt.beta_gen = 1.0 + alpha1 + alpha_c + alpha2;
    gt.base_rate = base_rate;

    const bool contextual = ctx.kind != ContextSchema::Kind::none;
    const double intercept_mean = phi_inv(base_rate) * gt.beta_gen;

    for (int page = 0; page < shape.pages; ++page) {
        TermSet terms;
        terms.current_action = true;
        if (contextual) terms.context_main = true;
        if (page > 0) {
            terms.previous_action = true;
            terms.previous_by_current = true;
            if (contextual) terms.context_by_current = true;
        }
        gt.forms.emplace_back(page, terms, shape.candidates[static_cast<std::size_t>(page)],
                              page > 0 ? shape.candidates[static_cast<std::size_t>(page - 1)] : 0,
                              contextual ? ctx.dim() : 0);

        const ModelForm& form = gt.forms.back();
        std::vector<double> raw(static_cast<std::size_t>(form.columns()));
        std::vector<double> eff(static_cast<std::size_t>(form.columns()));
        const auto labels = form.column_labels();
        for (std::size_t col = 0; col < raw.size(); ++col) {
            const std::string& term = labels[col].term;
            double alpha;
            if (term == "intercept") {
                alpha = 1.0;
            } else if (term == "current_action" || term == "context_main") {
                alpha = alpha1;
            } else if (term == "previous_action") {
                alpha = alpha_c;
            } else {  // previous_by_current, context_by_current
                alpha = alpha2;
            }
            raw[col] = rng.gaussian() + (term == "intercept" ? intercept_mean : 0.0);
            eff[col] = alpha * raw[col];
        }
        gt.weights.push_back(std::move(raw));
        gt.scaled.push_back(std::move(eff));
    }
    return gt;
}

double expected_g(const GroundTruth& gt, const ContextEncoding& context,
                  std::span<const int> trajectory) {
    if (static_cast<int>(trajectory.size()) != gt.shape.pages) {
        throw std::invalid_argument("expected_g: trajectory must cover every page");
    }
    double g = 0.0;
    double survive = 1.0;
    for (int page = 0; page < gt.shape.pages; ++page) {
        const std::optional<int> prev =
            page == 0 ? std::nullopt : std::optional<int>(trajectory[static_cast<std::size_t>(page - 1)]);
        const double r = gt.success_prob(page, context, prev, trajectory[static_cast<std::size_t>(page)]);
        g += survive * r;
        survive *= 1.0 - r;
    }
    return g;
}

std::pair<std::vector<int>, double> oracle_best(const GroundTruth& gt,
                                                const ContextEncoding& context,
                                                const FlowConstraints& constraints) {
    constraints.validate(gt.shape);
    double combos = 1.0;
    for (int n : gt.shape.candidates) combos *= n;
    if (combos > 1e6) {
        throw std::invalid_argument("oracle_best: more than 1e6 trajectories to enumerate");
    }

    const int pages = gt.shape.pages;
    std::vector<int> current(static_cast<std::size_t>(pages), 0);
    std::vector<int> best;
    double best_value = -1.0;

    // Odometer enumeration in lexicographic order, so ties resolve to the
    // lowest-index trajectory.
    while (true) {
        bool feasible = true;
        for (int page = 1; page < pages && feasible; ++page) {
            feasible = constraints.allowed(page, current[static_cast<std::size_t>(page - 1)],
                                           current[static_cast<std::size_t>(page)]);
        }
        if (feasible) {
            const double value = expected_g(gt, context, current);
            if (value > best_value) {
                best_value = value;
                best = current;
            }
        }
        int page = pages - 1;
        while (page >= 0) {
            if (++current[static_cast<std::size_t>(page)] <
                gt.shape.candidates[static_cast<std::size_t>(page)]) {
                break;
            }
            current[static_cast<std::size_t>(page)] = 0;
            --page;
        }
        if (page < 0) break;
    }
    if (best.empty()) throw std::invalid_argument("oracle_best: no feasible trajectory");
    return {std::move(best), best_value};
}

StepOutcome realize(const GroundTruth& gt, const ContextEncoding& context,
                    std::span<const int> trajectory, Rng& rng) {
    if (static_cast<int>(trajectory.size()) != gt.shape.pages) {
        throw std::invalid_argument("realize: trajectory must cover every page");
    }
    StepOutcome out;
    for (int page = 0; page < gt.shape.pages; ++page) {
        const int action = trajectory[static_cast<std::size_t>(page)];
        const std::optional<int> prev =
            page == 0 ? std::nullopt : std::optional<int>(trajectory[static_cast<std::size_t>(page - 1)]);
        const double r = gt.success_prob(page, context, prev, action);
        out.presented.emplace_back(page, action);
        const int reward = rng.bernoulli(r) ? 1 : 0;
        out.rewards.push_back(reward);
        if (reward == 1) {
            out.g = 1;
            out.terminal = FlowState::exit_success();
            return out;
        }
    }
    out.g = 0;
    out.terminal = FlowState::end_no_success();
    return out;
}

}  // namespace linflow
