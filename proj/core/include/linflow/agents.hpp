#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "linflow/blip.hpp"
#include "linflow/features.hpp"
#include "linflow/planner.hpp"
#include "linflow/rng.hpp"
#include "linflow/sim.hpp"

namespace linflow {

enum class AgentKind { mdp_with_bandits, interaction_bandits, independent_bandits, q_learning };

std::string_view agent_name(AgentKind kind);
AgentKind parse_agent_kind(std::string_view name);

// Per page, Thompson-sample that page's posterior and take the action with
// the highest predicted success; pages are chosen independently.
std::vector<int> independent_select(std::span<const ModelForm> forms,
                                    std::span<const GaussianPosterior> posteriors,
                                    const ContextEncoding& context, Rng& rng);

// Forward-greedy: page 1 maximises its predicted reward, each later page
// maximises given the action already chosen for the page before, skipping
// incompatible pairs.
std::vector<int> interaction_select(std::span<const ModelForm> forms,
                                    std::span<const GaussianPosterior> posteriors,
                                    const ContextEncoding& context, Rng& rng);

// Which label each presented page contributes to its bandit dataset:
// the short-term reward R_i for the MDP agent, the realized long-term
// reward G_i for the others. Pages after the first success get nothing.
struct PageLabel {
    int page;
    bool label;
};
std::vector<PageLabel> feedback_labels(AgentKind kind, const StepOutcome& outcome);

// Full per-page observation lists (features encoded from the trajectory).
std::vector<std::vector<Observation>> bandit_feedback(AgentKind kind,
                                                      std::span<const ModelForm> forms,
                                                      const ContextEncoding& context,
                                                      std::span<const int> trajectory,
                                                      const StepOutcome& outcome);

struct QLearnerConfig {
    double learning_rate = 0.05;
    double discount = 1.0;
    double epsilon_start = 0.05;
    double epsilon_end = 0.01;

    void validate() const;
};

// Exploration rate for a 1-based batch index. Batch 1 returns 0 (that batch
// explores through uniform tie-breaking on the zero-initialised table);
// batches 2..M interpolate linearly from epsilon_start down to epsilon_end.
double epsilon_for_batch(const QLearnerConfig& cfg, int batch_index, int total_batches);

// Tabular action values over states (page, previous action or start,
// context category or none).
class QTable {
  public:
    QTable(const FlowShape& shape, int context_categories);

    double get(int page, int prev, int ctx_category, int action) const;
    double& at(int page, int prev, int ctx_category, int action);
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

  private:
    std::size_t index(int page, int prev, int ctx_category, int action) const;

    FlowShape shape_;
    int categories_;  // 0 when the flow has no context
    std::vector<std::size_t> page_offset_;
    std::vector<double> values_;
};

// Epsilon-greedy trajectory. During batch 1 ties on the (all-zero) table
// break uniformly at random; afterwards ties break to the lowest index.
std::vector<int> q_select(const QTable& table, const QLearnerConfig& cfg, const FlowShape& shape,
                          const FlowConstraints& constraints, int ctx_category, int batch_index,
                          int total_batches, Rng& rng);

// One Bellman backup per presented page: terminal on success or past the
// last page, bootstrapped from the running table otherwise.
void q_update(QTable& table, const QLearnerConfig& cfg, const FlowShape& shape,
              const FlowConstraints& constraints, int ctx_category,
              std::span<const int> trajectory, const StepOutcome& outcome);

struct BanditOptions {
    double prior_mean = 0.0;
    double prior_variance = 1.0;
    double beta = 1.0;
    FormOptions form_options;
};

// Harness-facing agent: selects a trajectory per impression, buffers the
// feedback, and applies all pending updates at batch boundaries.
class Agent {
  public:
    virtual ~Agent() = default;
    virtual AgentKind kind() const = 0;
    virtual std::vector<int> select(const ContextEncoding& context, int ctx_category,
                                    int batch_index, int total_batches) = 0;
    virtual void record(const ContextEncoding& context, int ctx_category,
                        std::span<const int> trajectory, const StepOutcome& outcome) = 0;
    virtual void end_batch() = 0;

    // Introspection for run-state dumps and tests; null where not applicable.
    virtual const std::vector<GaussianPosterior>* posteriors() const { return nullptr; }
    virtual const QTable* q_table() const { return nullptr; }
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const FlowShape& shape,
                                  const FlowConstraints& constraints, const ContextSchema& ctx,
                                  const BanditOptions& bandit_options,
                                  const QLearnerConfig& q_config, Rng rng);

}  // namespace linflow
