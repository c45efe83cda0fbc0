#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "linflow/config.hpp"
#include "linflow/harness.hpp"
#include "linflow/outputs.hpp"

namespace {

struct CommonArgs {
    std::optional<std::filesystem::path> config_path;
    std::filesystem::path out_dir = "out";
    int workers = 0;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out) {
    cmd->add_option_function<std::string>(
           "--config", [&args](const std::string& s) { args.config_path = s; },
           "Config file (key = value with [sections]); omit for the default experiment");
    if (with_out) cmd->add_option("--out", args.out_dir, "Output directory")->capture_default_str();
    if (with_out) cmd->add_option("--workers", args.workers, "Parallel run workers (0 = all cores)");
    cmd->add_option("--set", args.overrides, "Override a config key, e.g. --set runs=10 or --set q_learning.discount=0.9")
        ->take_all();
}

linflow::ParsedConfig load(const CommonArgs& args) {
    auto parsed = linflow::load_config(args.config_path, args.overrides);
    if (args.workers > 0) parsed.experiment.workers = args.workers;
    return parsed;
}

void print_summary(const linflow::RegretSeries& series) {
    std::printf("%-22s %10s %12s %10s\n", "agent", "batches", "final_regret", "stderr");
    for (const auto& agent : series.agents) {
        std::printf("%-22s %10d %12.5f %10.5f\n", std::string(linflow::agent_name(agent.kind)).c_str(),
                    series.batches, series.final_mean(agent.kind), series.final_stderr(agent.kind));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linflow: multi-page flow optimization benchmark harness"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, validate_args;
    CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment and write regret/summary CSVs");
    add_common(run_cmd, run_args, true);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a sweep over pages or alpha2 and write plot CSVs");
    add_common(sweep_cmd, sweep_args, true);
    CLI::App* validate_cmd = app.add_subcommand("validate", "Check a config without running anything");
    add_common(validate_cmd, validate_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            auto parsed = load(run_args);
            const auto series = linflow::run_experiment(parsed.experiment, run_args.out_dir);
            linflow::emit_outputs(series, run_args.out_dir);
            print_summary(series);
            std::printf("wrote %s and %s\n", (run_args.out_dir / "regret.csv").c_str(),
                        (run_args.out_dir / "summary.csv").c_str());
        } else if (sweep_cmd->parsed()) {
            auto parsed = load(sweep_args);
            if (!parsed.sweep) {
                throw linflow::ConfigError("sweep: config needs a [sweep] section with an axis");
            }
            const auto result = linflow::sweep(parsed.experiment, *parsed.sweep);
            linflow::emit_sweep_outputs(result, sweep_args.out_dir);
            for (const auto& point : result.points) {
                std::printf("%s = %g\n",
                            parsed.sweep->kind == linflow::SweepAxis::Kind::pages ? "pages" : "alpha2",
                            point.value);
                print_summary(point.series);
            }
        } else {
            load(validate_args);
            std::printf("configuration OK\n");
        }
    } catch (const linflow::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
