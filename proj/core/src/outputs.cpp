#include "linflow/outputs.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace linflow {

namespace {

std::ofstream open_for_write(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

std::string trajectory_string(const std::vector<int>& trajectory) {
    std::string s;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        if (i > 0) s += '-';
        s += std::to_string(trajectory[i] + 1);
    }
    return s;
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void emit_outputs(const RegretSeries& series, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    const auto regret_path = dir / "regret.csv";
    auto regret_file = open_for_write(regret_path);
    regret_file << "agent,run,batch,cumulative_regret\n";
    for (const AgentSeries& agent : series.agents) {
        const auto& per_run = agent.per_run(series.mode);
        for (std::size_t run = 0; run < per_run.size(); ++run) {
            for (std::size_t batch = 0; batch < per_run[run].size(); ++batch) {
                regret_file << agent_name(agent.kind) << ',' << run + 1 << ',' << batch + 1 << ','
                            << format_double(per_run[run][batch]) << '\n';
            }
        }
    }
    finish(regret_file, regret_path);

    const auto summary_path = dir / "summary.csv";
    auto summary_file = open_for_write(summary_path);
    summary_file << "agent,batch,mean_cumulative_regret,stderr\n";
    for (const AgentSeries& agent : series.agents) {
        const auto mean = mean_over_runs(agent.per_run(series.mode));
        const auto se = stderr_over_runs(agent.per_run(series.mode));
        for (std::size_t batch = 0; batch < mean.size(); ++batch) {
            summary_file << agent_name(agent.kind) << ',' << batch + 1 << ','
                         << format_double(mean[batch]) << ',' << format_double(se[batch]) << '\n';
        }
    }
    finish(summary_file, summary_path);
}

void emit_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const bool pages = result.kind == SweepAxis::Kind::pages;
    const auto path = dir / (pages ? "plot_pages.csv" : "plot_alpha2.csv");
    auto file = open_for_write(path);
    file << "agent," << (pages ? "pages" : "alpha2") << ",mean_final_cumulative_regret,stderr\n";
    if (!result.points.empty()) {
        for (const AgentSeries& agent : result.points.front().series.agents) {
            for (const SweepPoint& point : result.points) {
                file << agent_name(agent.kind) << ','
                     << (pages ? std::to_string(static_cast<int>(point.value))
                               : format_double(point.value))
                     << ',' << format_double(point.series.final_mean(agent.kind)) << ','
                     << format_double(point.series.final_stderr(agent.kind)) << '\n';
            }
        }
    }
    finish(file, path);
}

void write_ground_truth_dump(const GroundTruth& gt, const std::vector<ContextEncoding>& encodings,
                             const std::vector<double>& oracle_values,
                             const std::vector<std::vector<int>>& oracle_trajectories,
                             const std::filesystem::path& dir, int run) {
    std::filesystem::create_directories(dir);

    const auto weights_path = dir / ("run_" + std::to_string(run + 1) + ".csv");
    auto weights_file = open_for_write(weights_path);
    weights_file << "page,column,alpha_multiplier,weight\n";
    for (std::size_t page = 0; page < gt.forms.size(); ++page) {
        const auto labels = gt.forms[page].column_labels();
        const auto& raw = gt.weights[page];
        for (std::size_t col = 0; col < labels.size(); ++col) {
            const std::string& term = labels[col].term;
            double alpha = 1.0;
            if (term == "current_action" || term == "context_main") {
                alpha = gt.alpha1;
            } else if (term == "previous_action") {
                alpha = gt.alpha_c;
            } else if (term == "previous_by_current" || term == "context_by_current") {
                alpha = gt.alpha2;
            }
            weights_file << page + 1 << ',' << labels[col].to_string() << ','
                         << format_double(alpha) << ',' << format_double(raw[col]) << '\n';
        }
    }
    finish(weights_file, weights_path);

    const auto oracle_path = dir / ("run_" + std::to_string(run + 1) + "_oracle.csv");
    auto oracle_file = open_for_write(oracle_path);
    oracle_file << "context_category,expected_g,trajectory\n";
    for (std::size_t cat = 0; cat < oracle_values.size(); ++cat) {
        oracle_file << (encodings[cat].empty() ? std::string("none") : std::to_string(cat + 1))
                    << ',' << format_double(oracle_values[cat]) << ','
                    << trajectory_string(oracle_trajectories[cat]) << '\n';
    }
    finish(oracle_file, oracle_path);
}

void write_run_state_dump(const std::vector<std::unique_ptr<Agent>>& agents,
                          const std::filesystem::path& dir, int run) {
    std::filesystem::create_directories(dir);
    const auto path = dir / ("run_" + std::to_string(run + 1) + "_posteriors.csv");
    auto file = open_for_write(path);
    file << "agent,page,dim,beta,index,mean,variance\n";
    for (const auto& agent : agents) {
        const auto* posteriors = agent->posteriors();
        if (!posteriors) continue;
        for (std::size_t page = 0; page < posteriors->size(); ++page) {
            const GaussianPosterior& p = (*posteriors)[page];
            for (int j = 0; j < p.dim(); ++j) {
                file << agent_name(agent->kind()) << ',' << page + 1 << ',' << p.dim() << ','
                     << format_double(p.beta()) << ',' << j + 1 << ','
                     << format_double(p.mean()[static_cast<std::size_t>(j)]) << ','
                     << format_double(p.variance()[static_cast<std::size_t>(j)]) << '\n';
            }
        }
    }
    finish(file, path);
}

}  // namespace linflow
