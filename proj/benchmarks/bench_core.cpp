#include <benchmark/benchmark.h>

#include "linflow/agents.hpp"
#include "linflow/blip.hpp"
#include "linflow/planner.hpp"
#include "linflow/probit.hpp"
#include "linflow/rng.hpp"
#include "linflow/sim.hpp"

using namespace linflow;

namespace {

std::vector<std::vector<double>> random_weights(const std::vector<ModelForm>& forms, Rng& rng) {
    std::vector<std::vector<double>> weights;
    for (const auto& form : forms) {
        std::vector<double> w(static_cast<std::size_t>(form.columns()));
        for (double& x : w) x = rng.gaussian();
        weights.push_back(std::move(w));
    }
    return weights;
}

}  // namespace

static void BM_ProbitCdf(benchmark::State& state) {
    double t = -8.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phi_cdf(t));
        t += 1e-6;
    }
}
BENCHMARK(BM_ProbitCdf);

static void BM_BlipUpdate(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    GaussianPosterior posterior(dim, 0.0, 1.0, 1.0);
    Rng rng(1);
    Observation obs;
    obs.features.resize(static_cast<std::size_t>(dim));
    for (double& f : obs.features) f = rng.uniform() < 0.5 ? 0.0 : 1.0;
    obs.label = true;
    for (auto _ : state) {
        posterior.update(obs);
        benchmark::DoNotOptimize(posterior);
    }
}
BENCHMARK(BM_BlipUpdate)->Arg(4)->Arg(16)->Arg(64);

static void BM_PlanBackwardInduction(benchmark::State& state) {
    const int pages = static_cast<int>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    FlowShape shape{pages, std::vector<int>(static_cast<std::size_t>(pages), n)};
    const auto forms = make_forms(FormFamily::interaction, shape, FlowConstraints{}, ContextSchema{});
    Rng rng(7);
    const auto weights = random_weights(forms, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(plan(shape, forms, weights, {}, 1.0));
    }
    state.SetComplexityN(pages * n * n);
}
BENCHMARK(BM_PlanBackwardInduction)
    ->Args({2, 3})
    ->Args({3, 3})
    ->Args({6, 3})
    ->Args({3, 8})
    ->Args({6, 8})
    ->Complexity(benchmark::oN);

static void BM_ImpressionLoop(benchmark::State& state) {
    FlowShape shape{3, {3, 3, 3}};
    Rng gt_rng(11);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, gt_rng);
    auto agent = make_agent(AgentKind::mdp_with_bandits, shape, FlowConstraints{}, ContextSchema{},
                            BanditOptions{}, QLearnerConfig{}, Rng(3));
    Rng reward_rng(5);
    int k = 0;
    for (auto _ : state) {
        const auto traj = agent->select({}, 0, 1, 14);
        const StepOutcome outcome = realize(gt, {}, traj, reward_rng);
        agent->record({}, 0, traj, outcome);
        if (++k % 1000 == 0) agent->end_batch();
        benchmark::DoNotOptimize(outcome);
    }
}
BENCHMARK(BM_ImpressionLoop);

BENCHMARK_MAIN();
