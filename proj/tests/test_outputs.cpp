#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "linflow/outputs.hpp"
#include "linflow/rng.hpp"

using namespace linflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int data_rows(const std::string& csv) {
    int rows = -1;  // skip the header
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    return rows;
}

RegretSeries fabricated_series(int agents, int runs, int batches) {
    RegretSeries series;
    series.runs = runs;
    series.batches = batches;
    series.batch_size = 1000;
    series.mode = RegretMode::realized;
    const AgentKind kinds[] = {AgentKind::mdp_with_bandits, AgentKind::interaction_bandits,
                               AgentKind::independent_bandits, AgentKind::q_learning};
    Rng rng(1);
    for (int a = 0; a < agents; ++a) {
        AgentSeries agent;
        agent.kind = kinds[a];
        for (int run = 0; run < runs; ++run) {
            std::vector<double> series_run;
            double cum = 0.0;
            for (int b = 0; b < batches; ++b) {
                cum += rng.uniform();
                series_run.push_back(cum);
            }
            agent.realized.push_back(series_run);
            agent.expected.push_back(series_run);
        }
        series.agents.push_back(std::move(agent));
    }
    return series;
}

}  // namespace

TEST_CASE("doubles are printed with 17 significant digits and round-trip") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform_int(12) - 6);
        const std::string s = format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("regret.csv carries one row per agent, run and batch") {
    const fs::path dir = fs::temp_directory_path() / "linflow_emit";
    fs::remove_all(dir);
    const RegretSeries series = fabricated_series(4, 30, 14);
    emit_outputs(series, dir);
    CHECK(data_rows(slurp(dir / "regret.csv")) == 4 * 30 * 14);
    CHECK(data_rows(slurp(dir / "summary.csv")) == 4 * 14);
    CHECK(slurp(dir / "regret.csv").rfind("agent,run,batch,cumulative_regret\n", 0) == 0);
    CHECK(slurp(dir / "summary.csv").rfind("agent,batch,mean_cumulative_regret,stderr\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("re-emitting the same series overwrites byte-identically") {
    const fs::path dir = fs::temp_directory_path() / "linflow_emit_twice";
    fs::remove_all(dir);
    const RegretSeries series = fabricated_series(2, 3, 5);
    emit_outputs(series, dir);
    const std::string first = slurp(dir / "regret.csv");
    emit_outputs(series, dir);
    CHECK(slurp(dir / "regret.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("sweep plots list one row per agent per grid point") {
    SweepResult result;
    result.kind = SweepAxis::Kind::pages;
    for (int pages : {2, 3, 4, 5, 6}) {
        result.points.push_back({static_cast<double>(pages), fabricated_series(3, 2, 4)});
    }
    const fs::path dir = fs::temp_directory_path() / "linflow_plot";
    fs::remove_all(dir);
    emit_sweep_outputs(result, dir);
    const std::string csv = slurp(dir / "plot_pages.csv");
    CHECK(data_rows(csv) == 3 * 5);
    CHECK(csv.rfind("agent,pages,mean_final_cumulative_regret,stderr\n", 0) == 0);

    result.kind = SweepAxis::Kind::alpha2;
    emit_sweep_outputs(result, dir);
    CHECK(fs::exists(dir / "plot_alpha2.csv"));
    fs::remove_all(dir);
}

TEST_CASE("unwritable output directories surface the path") {
    const RegretSeries series = fabricated_series(1, 1, 1);
    CHECK_THROWS_AS(emit_outputs(series, "/proc/linflow_not_writable"), std::exception);
}
