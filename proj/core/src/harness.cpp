#include "linflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "linflow/outputs.hpp"
#include "linflow/sim.hpp"

namespace linflow {

void ExperimentConfig::validate() const {
    shape.validate();
    ctx.validate();
    constraints.validate(shape);
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (steps % batch_size != 0) throw std::invalid_argument("steps must be divisible by batch_size");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (!(base_rate > 0.0 && base_rate < 1.0)) throw std::invalid_argument("base_rate must lie in (0, 1)");
    if (alpha1 < 0.0 || alpha_c < 0.0 || alpha2 < 0.0) throw std::invalid_argument("alphas must be >= 0");
    if (agents.empty()) throw std::invalid_argument("agents must not be empty");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        for (std::size_t j = i + 1; j < agents.size(); ++j) {
            if (agents[i] == agents[j]) {
                throw std::invalid_argument("duplicate agent '" + std::string(agent_name(agents[i])) + "'");
            }
        }
    }
    if (!(bandit_options.beta > 0.0)) throw std::invalid_argument("learner_beta must be > 0");
    if (!(bandit_options.prior_variance > 0.0)) throw std::invalid_argument("bandits.prior_var must be > 0");
    q_config.validate();
    if (!constraints.empty() &&
        std::find(agents.begin(), agents.end(), AgentKind::independent_bandits) != agents.end()) {
        throw std::invalid_argument(
            "independent_bandits cannot honor incompatibilities (it selects pages independently); "
            "drop the agent or the incompatible list");
    }
    double combos = 1.0;
    for (int n : shape.candidates) combos *= n;
    if (combos > 1e6) throw std::invalid_argument("more than 1e6 trajectories; oracle enumeration would not finish");
    if (workers < 0) throw std::invalid_argument("workers must be >= 0");
}

const AgentSeries& RegretSeries::agent(AgentKind kind) const {
    for (const AgentSeries& a : agents) {
        if (a.kind == kind) return a;
    }
    throw std::invalid_argument("RegretSeries: agent '" + std::string(agent_name(kind)) + "' not present");
}

std::vector<double> RegretSeries::mean(AgentKind kind, RegretMode which) const {
    return mean_over_runs(agent(kind).per_run(which));
}

std::vector<double> RegretSeries::stderr_(AgentKind kind, RegretMode which) const {
    return stderr_over_runs(agent(kind).per_run(which));
}

std::vector<double> mean_over_runs(const std::vector<std::vector<double>>& per_run) {
    if (per_run.empty()) return {};
    std::vector<double> mean(per_run.front().size(), 0.0);
    for (const auto& run : per_run) {
        for (std::size_t b = 0; b < mean.size(); ++b) mean[b] += run[b];
    }
    for (double& m : mean) m /= static_cast<double>(per_run.size());
    return mean;
}

std::vector<double> stderr_over_runs(const std::vector<std::vector<double>>& per_run) {
    const std::size_t runs = per_run.size();
    std::vector<double> mean = mean_over_runs(per_run);
    std::vector<double> se(mean.size(), 0.0);
    if (runs < 2) return se;
    for (const auto& run : per_run) {
        for (std::size_t b = 0; b < mean.size(); ++b) {
            const double d = run[b] - mean[b];
            se[b] += d * d;
        }
    }
    for (double& s : se) {
        s = std::sqrt(s / static_cast<double>(runs - 1) / static_cast<double>(runs));
    }
    return se;
}

std::vector<double> cumulative_batches(std::span<const double> per_step_regret, int batch_size) {
    if (batch_size < 1 || per_step_regret.size() % static_cast<std::size_t>(batch_size) != 0) {
        throw std::invalid_argument("cumulative_batches: steps must be a multiple of batch_size");
    }
    std::vector<double> series;
    series.reserve(per_step_regret.size() / static_cast<std::size_t>(batch_size));
    double cum = 0.0;
    for (std::size_t k = 0; k < per_step_regret.size(); ++k) {
        cum += per_step_regret[k];
        if ((k + 1) % static_cast<std::size_t>(batch_size) == 0) {
            series.push_back(cum / static_cast<double>(batch_size));
        }
    }
    return series;
}

RegretSeries regret(const ExperimentConfig& cfg,
                    const std::vector<std::vector<std::vector<StepRecord>>>& records) {
    if (records.size() != cfg.agents.size()) {
        throw std::invalid_argument("regret: need one record block per agent");
    }
    RegretSeries series;
    series.runs = cfg.runs;
    series.batches = cfg.batches();
    series.batch_size = cfg.batch_size;
    series.mode = cfg.regret_mode;
    for (std::size_t a = 0; a < records.size(); ++a) {
        if (static_cast<int>(records[a].size()) != cfg.runs) {
            throw std::invalid_argument("regret: ragged records (runs)");
        }
        AgentSeries agent_series;
        agent_series.kind = cfg.agents[a];
        for (const auto& run : records[a]) {
            if (static_cast<int>(run.size()) != cfg.steps) {
                throw std::invalid_argument("regret: ragged records (steps)");
            }
            std::vector<double> per_step(run.size());
            for (std::size_t k = 0; k < run.size(); ++k) per_step[k] = run[k].oracle - run[k].g;
            auto cum = cumulative_batches(per_step, cfg.batch_size);
            agent_series.realized.push_back(cum);
            agent_series.expected.push_back(std::move(cum));
        }
        series.agents.push_back(std::move(agent_series));
    }
    return series;
}

namespace {

struct RunOutput {
    // [agent][batch] cumulative normalised regret at each batch boundary.
    std::vector<std::vector<double>> realized;
    std::vector<std::vector<double>> expected;
};

RunOutput run_one(const ExperimentConfig& cfg, int run,
                  const std::optional<std::filesystem::path>& dump_dir) {
    Rng gt_rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(run), "ground_truth");
    const GroundTruth gt = sample_ground_truth(cfg.shape, cfg.ctx, cfg.alpha1, cfg.alpha_c,
                                               cfg.alpha2, cfg.base_rate, gt_rng);

    const int categories = cfg.ctx.kind == ContextSchema::Kind::categorical ? cfg.ctx.categories : 1;
    std::vector<ContextEncoding> encodings(static_cast<std::size_t>(categories));
    std::vector<double> oracle_value(static_cast<std::size_t>(categories));
    std::vector<std::vector<int>> oracle_traj(static_cast<std::size_t>(categories));
    for (int cat = 0; cat < categories; ++cat) {
        if (cfg.ctx.kind == ContextSchema::Kind::categorical) {
            encodings[static_cast<std::size_t>(cat)] = cfg.ctx.encode(cat);
        }
        auto [traj, value] = oracle_best(gt, encodings[static_cast<std::size_t>(cat)], cfg.constraints);
        oracle_value[static_cast<std::size_t>(cat)] = value;
        oracle_traj[static_cast<std::size_t>(cat)] = std::move(traj);
    }

    const std::size_t n_agents = cfg.agents.size();
    std::vector<std::unique_ptr<Agent>> agents;
    std::vector<Rng> reward_rngs;
    agents.reserve(n_agents);
    reward_rngs.reserve(n_agents);
    for (AgentKind kind : cfg.agents) {
        const std::string name(agent_name(kind));
        agents.push_back(make_agent(kind, cfg.shape, cfg.constraints, cfg.ctx, cfg.bandit_options,
                                    cfg.q_config,
                                    Rng::stream(cfg.seed, static_cast<std::uint64_t>(run),
                                                "select:" + name)));
        reward_rngs.push_back(
            Rng::stream(cfg.seed, static_cast<std::uint64_t>(run), "reward:" + name));
    }

    Rng ctx_rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(run), "context");
    const int total_batches = cfg.batches();

    RunOutput out;
    out.realized.assign(n_agents, {});
    out.expected.assign(n_agents, {});
    std::vector<double> cum_realized(n_agents, 0.0);
    std::vector<double> cum_expected(n_agents, 0.0);

    for (int k = 0; k < cfg.steps; ++k) {
        const int cat = cfg.ctx.kind == ContextSchema::Kind::categorical
                            ? ctx_rng.uniform_int(categories)
                            : 0;
        const ContextEncoding& enc = encodings[static_cast<std::size_t>(cat)];
        const double best = oracle_value[static_cast<std::size_t>(cat)];
        const int batch_index = k / cfg.batch_size + 1;
        for (std::size_t a = 0; a < n_agents; ++a) {
            const std::vector<int> traj = agents[a]->select(enc, cat, batch_index, total_batches);
            const StepOutcome outcome = realize(gt, enc, traj, reward_rngs[a]);
            agents[a]->record(enc, cat, traj, outcome);
            cum_realized[a] += best - static_cast<double>(outcome.g);
            cum_expected[a] += best - expected_g(gt, enc, traj);
        }
        if ((k + 1) % cfg.batch_size == 0) {
            for (std::size_t a = 0; a < n_agents; ++a) {
                agents[a]->end_batch();
                out.realized[a].push_back(cum_realized[a] / cfg.batch_size);
                out.expected[a].push_back(cum_expected[a] / cfg.batch_size);
            }
        }
    }

    if (dump_dir) {
        if (cfg.dump_ground_truth) {
            write_ground_truth_dump(gt, encodings, oracle_value, oracle_traj,
                                    *dump_dir / "ground_truth", run);
        }
        if (cfg.dump_run_state) {
            write_run_state_dump(agents, *dump_dir / "run_state", run);
        }
    }
    return out;
}

}  // namespace

RegretSeries run_experiment(const ExperimentConfig& cfg,
                            const std::optional<std::filesystem::path>& dump_dir) {
    cfg.validate();
    if (dump_dir) {
        if (cfg.dump_ground_truth) std::filesystem::create_directories(*dump_dir / "ground_truth");
        if (cfg.dump_run_state) std::filesystem::create_directories(*dump_dir / "run_state");
    }

    std::vector<RunOutput> outputs(static_cast<std::size_t>(cfg.runs));
    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.runs);

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (int run = next.fetch_add(1); run < cfg.runs; run = next.fetch_add(1)) {
            try {
                outputs[static_cast<std::size_t>(run)] = run_one(cfg, run, dump_dir);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    RegretSeries series;
    series.runs = cfg.runs;
    series.batches = cfg.batches();
    series.batch_size = cfg.batch_size;
    series.mode = cfg.regret_mode;
    for (std::size_t a = 0; a < cfg.agents.size(); ++a) {
        AgentSeries agent_series;
        agent_series.kind = cfg.agents[a];
        for (int run = 0; run < cfg.runs; ++run) {
            agent_series.realized.push_back(outputs[static_cast<std::size_t>(run)].realized[a]);
            agent_series.expected.push_back(outputs[static_cast<std::size_t>(run)].expected[a]);
        }
        series.agents.push_back(std::move(agent_series));
    }
    return series;
}

SweepResult sweep(const ExperimentConfig& base, const SweepAxis& axis) {
    if (axis.values.empty()) throw std::invalid_argument("sweep: empty axis");
    SweepResult result;
    result.kind = axis.kind;
    for (double value : axis.values) {
        ExperimentConfig cfg = base;
        if (axis.kind == SweepAxis::Kind::pages) {
            const int pages = static_cast<int>(value);
            if (pages < 1 || static_cast<double>(pages) != value) {
                throw std::invalid_argument("sweep: pages axis needs positive integers");
            }
            if (!base.constraints.empty()) {
                throw std::invalid_argument("sweep: pages axis cannot rebuild incompatibility lists");
            }
            cfg.shape.pages = pages;
            cfg.shape.candidates.assign(static_cast<std::size_t>(pages), base.shape.candidates.front());
            cfg.constraints = {};
        } else {
            if (value < 0.0) throw std::invalid_argument("sweep: alpha2 must be >= 0");
            cfg.alpha2 = value;
        }
        result.points.push_back({value, run_experiment(cfg)});
    }
    return result;
}

}  // namespace linflow
