#include "linflow/agents.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "linflow/probit.hpp"

namespace linflow {

std::string_view agent_name(AgentKind kind) {
    switch (kind) {
        case AgentKind::mdp_with_bandits: return "mdp_with_bandits";
        case AgentKind::interaction_bandits: return "interaction_bandits";
        case AgentKind::independent_bandits: return "independent_bandits";
        case AgentKind::q_learning: return "q_learning";
    }
    throw std::logic_error("agent_name: unknown kind");
}

AgentKind parse_agent_kind(std::string_view name) {
    if (name == "mdp_with_bandits") return AgentKind::mdp_with_bandits;
    if (name == "interaction_bandits") return AgentKind::interaction_bandits;
    if (name == "independent_bandits") return AgentKind::independent_bandits;
    if (name == "q_learning") return AgentKind::q_learning;
    throw std::invalid_argument("unknown agent kind '" + std::string(name) + "'");
}

namespace {

int argmax_success(const ModelForm& form, const GaussianPosterior& posterior,
                   std::span<const double> weights, const ContextEncoding& context,
                   std::optional<int> prev) {
    double best = -1.0;
    int best_action = -1;
    for (int action : form.feasible_actions(prev)) {
        const double u = form.utility(context, prev, action, weights);
        const double p = phi_cdf(u / posterior.beta());
        if (p > best) {
            best = p;
            best_action = action;
        }
    }
    return best_action;
}

}  // namespace

std::vector<int> independent_select(std::span<const ModelForm> forms,
                                    std::span<const GaussianPosterior> posteriors,
                                    const ContextEncoding& context, Rng& rng) {
    std::vector<int> trajectory;
    trajectory.reserve(forms.size());
    for (std::size_t page = 0; page < forms.size(); ++page) {
        const auto weights = posteriors[page].sample_weights(rng);
        trajectory.push_back(argmax_success(forms[page], posteriors[page], weights, context,
                                            std::nullopt));
    }
    return trajectory;
}

std::vector<int> interaction_select(std::span<const ModelForm> forms,
                                    std::span<const GaussianPosterior> posteriors,
                                    const ContextEncoding& context, Rng& rng) {
    std::vector<int> trajectory;
    trajectory.reserve(forms.size());
    for (std::size_t page = 0; page < forms.size(); ++page) {
        const auto weights = posteriors[page].sample_weights(rng);
        const std::optional<int> prev =
            page == 0 ? std::nullopt : std::optional<int>(trajectory.back());
        trajectory.push_back(argmax_success(forms[page], posteriors[page], weights, context, prev));
    }
    return trajectory;
}

std::vector<PageLabel> feedback_labels(AgentKind kind, const StepOutcome& outcome) {
    if (kind == AgentKind::q_learning) {
        throw std::invalid_argument("feedback_labels: q_learning does not consume observations");
    }
    std::vector<PageLabel> labels;
    labels.reserve(outcome.presented.size());
    if (kind == AgentKind::mdp_with_bandits) {
        for (std::size_t i = 0; i < outcome.presented.size(); ++i) {
            labels.push_back({outcome.presented[i].first, outcome.rewards[i] == 1});
        }
        return labels;
    }
    // Long-term labels: G_i = max(R_i, G_{i+1}) over the presented prefix.
    std::vector<int> g(outcome.rewards.size());
    int tail = 0;
    for (std::size_t i = outcome.rewards.size(); i-- > 0;) {
        tail = std::max(outcome.rewards[i], tail);
        g[i] = tail;
    }
    for (std::size_t i = 0; i < outcome.presented.size(); ++i) {
        labels.push_back({outcome.presented[i].first, g[i] == 1});
    }
    return labels;
}

std::vector<std::vector<Observation>> bandit_feedback(AgentKind kind,
                                                      std::span<const ModelForm> forms,
                                                      const ContextEncoding& context,
                                                      std::span<const int> trajectory,
                                                      const StepOutcome& outcome) {
    std::vector<std::vector<Observation>> per_page(forms.size());
    for (const PageLabel& label : feedback_labels(kind, outcome)) {
        const auto page = static_cast<std::size_t>(label.page);
        const std::optional<int> prev =
            label.page == 0 ? std::nullopt : std::optional<int>(trajectory[page - 1]);
        per_page[page].push_back(
            {forms[page].encode(context, prev, trajectory[page]), label.label});
    }
    return per_page;
}

void QLearnerConfig::validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw std::invalid_argument("q_learning.learning_rate must lie in (0, 1]");
    }
    if (!(discount >= 0.0 && discount <= 1.0)) {
        throw std::invalid_argument("q_learning.discount must lie in [0, 1]");
    }
    if (!(epsilon_start >= epsilon_end && epsilon_end >= 0.0)) {
        throw std::invalid_argument("q_learning.epsilon_start must be >= epsilon_end >= 0");
    }
}

double epsilon_for_batch(const QLearnerConfig& cfg, int batch_index, int total_batches) {
    if (batch_index < 1) throw std::invalid_argument("epsilon_for_batch: batch_index is 1-based");
    if (batch_index == 1) return 0.0;
    const int denom = std::max(total_batches - 2, 1);
    const double frac = static_cast<double>(batch_index - 2) / static_cast<double>(denom);
    const double eps = cfg.epsilon_start - (cfg.epsilon_start - cfg.epsilon_end) * frac;
    return std::clamp(eps, cfg.epsilon_end, cfg.epsilon_start);
}

QTable::QTable(const FlowShape& shape, int context_categories)
    : shape_(shape), categories_(context_categories) {
    shape_.validate();
    if (categories_ < 0) throw std::invalid_argument("QTable: negative category count");
    const int cats = std::max(categories_, 1);
    page_offset_.resize(static_cast<std::size_t>(shape_.pages) + 1);
    std::size_t total = 0;
    for (int page = 0; page < shape_.pages; ++page) {
        page_offset_[static_cast<std::size_t>(page)] = total;
        const int prevs = page == 0 ? 1 : shape_.candidates[static_cast<std::size_t>(page - 1)];
        total += static_cast<std::size_t>(prevs) * static_cast<std::size_t>(cats) *
                 static_cast<std::size_t>(shape_.candidates[static_cast<std::size_t>(page)]);
    }
    page_offset_.back() = total;
    values_.assign(total, 0.0);
}

std::size_t QTable::index(int page, int prev, int ctx_category, int action) const {
    const int cats = std::max(categories_, 1);
    const int cat = categories_ == 0 ? 0 : ctx_category;
    const int prev_slot = page == 0 ? 0 : prev;
    const int n_action = shape_.candidates[static_cast<std::size_t>(page)];
    return page_offset_[static_cast<std::size_t>(page)] +
           (static_cast<std::size_t>(prev_slot) * static_cast<std::size_t>(cats) +
            static_cast<std::size_t>(cat)) *
               static_cast<std::size_t>(n_action) +
           static_cast<std::size_t>(action);
}

double QTable::get(int page, int prev, int ctx_category, int action) const {
    return values_[index(page, prev, ctx_category, action)];
}

double& QTable::at(int page, int prev, int ctx_category, int action) {
    return values_[index(page, prev, ctx_category, action)];
}

std::vector<int> q_select(const QTable& table, const QLearnerConfig& cfg, const FlowShape& shape,
                          const FlowConstraints& constraints, int ctx_category, int batch_index,
                          int total_batches, Rng& rng) {
    const double eps = epsilon_for_batch(cfg, batch_index, total_batches);
    std::vector<int> trajectory;
    trajectory.reserve(static_cast<std::size_t>(shape.pages));
    std::vector<int> ties;
    for (int page = 0; page < shape.pages; ++page) {
        const int prev = page == 0 ? -1 : trajectory.back();
        std::vector<int> feasible;
        for (int a = 0; a < shape.candidates[static_cast<std::size_t>(page)]; ++a) {
            if (page == 0 || constraints.allowed(page, prev, a)) feasible.push_back(a);
        }
        int chosen;
        if (eps > 0.0 && rng.uniform() < eps) {
            chosen = feasible[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(feasible.size())))];
        } else {
            double best = -1e300;
            ties.clear();
            for (int a : feasible) {
                const double q = table.get(page, prev, ctx_category, a);
                if (q > best) {
                    best = q;
                    ties.assign(1, a);
                } else if (q == best) {
                    ties.push_back(a);
                }
            }
            if (batch_index == 1 && ties.size() > 1) {
                chosen = ties[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(ties.size())))];
            } else {
                chosen = ties.front();
            }
        }
        trajectory.push_back(chosen);
    }
    return trajectory;
}

void q_update(QTable& table, const QLearnerConfig& cfg, const FlowShape& shape,
              const FlowConstraints& constraints, int ctx_category,
              std::span<const int> trajectory, const StepOutcome& outcome) {
    for (std::size_t i = 0; i < outcome.presented.size(); ++i) {
        const int page = outcome.presented[i].first;
        const int action = outcome.presented[i].second;
        const int prev = page == 0 ? -1 : trajectory[static_cast<std::size_t>(page - 1)];
        const double r = outcome.rewards[i];
        const bool terminal = outcome.rewards[i] == 1 || page == shape.pages - 1;
        double future = 0.0;
        if (!terminal) {
            for (int a = 0; a < shape.candidates[static_cast<std::size_t>(page + 1)]; ++a) {
                if (!constraints.allowed(page + 1, action, a)) continue;
                future = std::max(future, table.get(page + 1, action, ctx_category, a));
            }
        }
        double& q = table.at(page, prev, ctx_category, action);
        q += cfg.learning_rate * (r + cfg.discount * future - q);
    }
}

namespace {

class BanditAgent : public Agent {
  public:
    BanditAgent(AgentKind kind, const FlowShape& shape, std::vector<ModelForm> forms,
                const BanditOptions& options, Rng rng)
        : kind_(kind), shape_(shape), forms_(std::move(forms)), rng_(rng) {
        for (const ModelForm& form : forms_) {
            posteriors_.emplace_back(form.columns(), options.prior_mean, options.prior_variance,
                                     options.beta);
            weights_.emplace_back(static_cast<std::size_t>(form.columns()));
        }
        pending_.resize(forms_.size());
    }

    AgentKind kind() const override { return kind_; }

    std::vector<int> select(const ContextEncoding& context, int /*ctx_category*/,
                            int /*batch_index*/, int /*total_batches*/) override {
        for (std::size_t page = 0; page < posteriors_.size(); ++page) {
            posteriors_[page].sample_weights_into(rng_, weights_[page]);
        }
        if (kind_ == AgentKind::mdp_with_bandits) {
            return plan(shape_, forms_, weights_, context, posteriors_.front().beta()).trajectory;
        }
        if (kind_ == AgentKind::interaction_bandits) {
            return select_forward(true, context);
        }
        return select_forward(false, context);
    }

    void record(const ContextEncoding& context, int /*ctx_category*/,
                std::span<const int> trajectory, const StepOutcome& outcome) override {
        for (const PageLabel& label : feedback_labels(kind_, outcome)) {
            const auto page = static_cast<std::size_t>(label.page);
            const std::optional<int> prev =
                label.page == 0 ? std::nullopt : std::optional<int>(trajectory[page - 1]);
            pending_[page].push_back(
                {forms_[page].encode(context, prev, trajectory[page]), label.label});
        }
    }

    void end_batch() override {
        for (std::size_t page = 0; page < posteriors_.size(); ++page) {
            posteriors_[page].update_batch(pending_[page]);
            pending_[page].clear();
        }
    }

    const std::vector<GaussianPosterior>* posteriors() const override { return &posteriors_; }

  private:
    std::vector<int> select_forward(bool conditioned, const ContextEncoding& context) {
        std::vector<int> trajectory;
        trajectory.reserve(forms_.size());
        for (std::size_t page = 0; page < forms_.size(); ++page) {
            std::optional<int> prev;
            if (conditioned && page > 0) prev = trajectory.back();
            double best = -1.0;
            int best_action = -1;
            for (int action : forms_[page].feasible_actions(prev)) {
                const double u = forms_[page].utility(context, prev, action, weights_[page]);
                const double p = phi_cdf(u / posteriors_[page].beta());
                if (p > best) {
                    best = p;
                    best_action = action;
                }
            }
            trajectory.push_back(best_action);
        }
        return trajectory;
    }

    AgentKind kind_;
    FlowShape shape_;
    std::vector<ModelForm> forms_;
    std::vector<GaussianPosterior> posteriors_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<Observation>> pending_;
    Rng rng_;
};

class QAgent : public Agent {
  public:
    QAgent(const FlowShape& shape, const FlowConstraints& constraints, int categories,
           const QLearnerConfig& cfg, Rng rng)
        : shape_(shape), constraints_(constraints), cfg_(cfg), table_(shape, categories), rng_(rng) {}

    AgentKind kind() const override { return AgentKind::q_learning; }

    std::vector<int> select(const ContextEncoding& /*context*/, int ctx_category, int batch_index,
                            int total_batches) override {
        return q_select(table_, cfg_, shape_, constraints_, ctx_category, batch_index,
                        total_batches, rng_);
    }

    void record(const ContextEncoding& /*context*/, int ctx_category,
                std::span<const int> trajectory, const StepOutcome& outcome) override {
        pending_.push_back({ctx_category, std::vector<int>(trajectory.begin(), trajectory.end()),
                            outcome});
    }

    void end_batch() override {
        for (const Episode& ep : pending_) {
            q_update(table_, cfg_, shape_, constraints_, ep.ctx_category, ep.trajectory, ep.outcome);
        }
        pending_.clear();
    }

    const QTable* q_table() const override { return &table_; }

  private:
    struct Episode {
        int ctx_category;
        std::vector<int> trajectory;
        StepOutcome outcome;
    };

    FlowShape shape_;
    FlowConstraints constraints_;
    QLearnerConfig cfg_;
    QTable table_;
    std::vector<Episode> pending_;
    Rng rng_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(AgentKind kind, const FlowShape& shape,
                                  const FlowConstraints& constraints, const ContextSchema& ctx,
                                  const BanditOptions& bandit_options,
                                  const QLearnerConfig& q_config, Rng rng) {
    switch (kind) {
        case AgentKind::mdp_with_bandits:
        case AgentKind::interaction_bandits: {
            auto forms = make_forms(FormFamily::interaction, shape, constraints, ctx,
                                    bandit_options.form_options);
            return std::make_unique<BanditAgent>(kind, shape, std::move(forms), bandit_options, rng);
        }
        case AgentKind::independent_bandits: {
            // Formula overrides only reshape the interaction-structured
            // families; the independent family keeps its defining form.
            FormOptions opts = bandit_options.form_options;
            opts.page1_terms.reset();
            opts.later_terms.reset();
            auto forms = make_forms(FormFamily::independent, shape, constraints, ctx, opts);
            return std::make_unique<BanditAgent>(kind, shape, std::move(forms), bandit_options, rng);
        }
        case AgentKind::q_learning: {
            q_config.validate();
            constraints.validate(shape);
            return std::make_unique<QAgent>(shape, constraints, ctx.dim(), q_config, rng);
        }
    }
    throw std::logic_error("make_agent: unknown kind");
}

}  // namespace linflow
