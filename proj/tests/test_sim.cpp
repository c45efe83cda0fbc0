#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "linflow/probit.hpp"
#include "linflow/rng.hpp"
#include "linflow/sim.hpp"
#include "oracles.hpp"

using namespace linflow;

namespace {

// Ground truth with every utility pinned to intercept-only, so page
// probabilities are set exactly via Phi(intercept / beta).
GroundTruth fixed_prob_truth(const std::vector<double>& page_probs) {
    const int pages = static_cast<int>(page_probs.size());
    FlowShape shape{pages, std::vector<int>(static_cast<std::size_t>(pages), 2)};
    Rng rng(1);
    GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, rng);
    for (int page = 0; page < pages; ++page) {
        auto& scaled = gt.scaled[static_cast<std::size_t>(page)];
        std::fill(scaled.begin(), scaled.end(), 0.0);
        const double p = page_probs[static_cast<std::size_t>(page)];
        scaled[0] = p >= 1.0 ? 39.0 * gt.beta_gen
                             : (p <= 0.0 ? -39.0 * gt.beta_gen : phi_inv(p) * gt.beta_gen);
    }
    return gt;
}

}  // namespace

TEST_CASE("ground truth carries the composed probit scale") {
    FlowShape shape{3, {3, 3, 3}};
    Rng rng(11);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, rng);
    CHECK(gt.beta_gen == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(gt.forms.size() == 3);
    CHECK(gt.forms[0].columns() == 4);
    CHECK(gt.forms[1].columns() == 16);

    Rng rng2(11);
    CHECK_THROWS_AS(sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.0, rng2),
                    std::invalid_argument);
    Rng rng3(11);
    CHECK_THROWS_AS(sample_ground_truth(shape, ContextSchema{}, -1.0, 1.0, 2.0, 0.1, rng3),
                    std::invalid_argument);
}

TEST_CASE("intercept draws centre on phi_inv(base_rate) * beta_gen") {
    FlowShape shape{1, {1}};
    const double expect = phi_inv(0.1) * 5.0;
    CHECK(expect == doctest::Approx(-6.407757827723002).epsilon(1e-12));
    Rng rng(321);
    double sum = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, rng);
        sum += gt.weights[0][0];
    }
    // Draws are Normal(expect, 1): the mean of 4000 is within ~4 sigma/sqrt(n).
    CHECK(std::fabs(sum / n - expect) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("alpha2 = 0 removes every interaction contribution") {
    FlowShape shape{3, {3, 3, 3}};
    Rng rng(7);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 0.0, 0.0, 0.2, rng);
    for (int prev = 0; prev < 3; ++prev) {
        for (int cur = 0; cur < 3; ++cur) {
            CHECK(gt.success_prob(1, {}, prev, cur) == gt.success_prob(1, {}, 0, cur));
        }
    }
}

TEST_CASE("alpha1 = 0 flattens page-1 probabilities across actions") {
    FlowShape shape{2, {3, 3}};
    Rng rng(13);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 0.0, 1.0, 2.0, 0.1, rng);
    CHECK(gt.success_prob(0, {}, std::nullopt, 0) == gt.success_prob(0, {}, std::nullopt, 1));
    CHECK(gt.success_prob(0, {}, std::nullopt, 0) == gt.success_prob(0, {}, std::nullopt, 2));
}

TEST_CASE("success probabilities follow the probit of the utility") {
    GroundTruth gt = fixed_prob_truth({0.5, 0.5});
    CHECK(gt.success_prob(0, {}, std::nullopt, 0) == 0.5);
    // Utility pinned to beta_gen: probability Phi(1).
    gt.scaled[0][0] = gt.beta_gen;
    CHECK(gt.success_prob(0, {}, std::nullopt, 1) ==
          doctest::Approx(0.8413447460685429).epsilon(1e-14));
}

TEST_CASE("expected_g matches the chained form and its product identity") {
    const GroundTruth gt = fixed_prob_truth({0.3, 0.5});
    const std::vector<int> traj{0, 0};
    CHECK(expected_g(gt, {}, traj) == doctest::Approx(0.65).epsilon(1e-12));

    const GroundTruth three = fixed_prob_truth({0.5, 0.5, 0.5});
    const std::vector<int> traj3{0, 0, 0};
    CHECK(expected_g(three, {}, traj3) == doctest::Approx(0.875).epsilon(1e-12));

    const GroundTruth sure = fixed_prob_truth({0.2, 1.0, 0.3});
    CHECK(expected_g(sure, {}, traj3) == doctest::Approx(1.0).epsilon(1e-15));

    // Identity vs 1 - prod(1 - r) on random instances.
    Rng rng(55);
    for (int trial = 0; trial < 1000; ++trial) {
        FlowShape shape{3, {2, 2, 2}};
        Rng gen(1000 + trial);
        const GroundTruth random_gt =
            sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, gen);
        std::vector<int> t{rng.uniform_int(2), rng.uniform_int(2), rng.uniform_int(2)};
        double prod = 1.0;
        for (int page = 0; page < 3; ++page) {
            const std::optional<int> prev =
                page == 0 ? std::nullopt : std::optional<int>(t[static_cast<std::size_t>(page - 1)]);
            prod *= 1.0 - random_gt.success_prob(page, {}, prev, t[static_cast<std::size_t>(page)]);
        }
        CHECK(std::fabs(expected_g(random_gt, {}, t) - (1.0 - prod)) <= 1e-12);
    }
}

TEST_CASE("per-page continue and success probabilities are complementary") {
    FlowShape shape{2, {3, 3}};
    Rng rng(17);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, rng);
    for (int prev = 0; prev < 3; ++prev) {
        for (int cur = 0; cur < 3; ++cur) {
            const double success = gt.success_prob(1, {}, prev, cur);
            const auto& form = gt.forms[1];
            const double u = form.utility({}, prev, cur, gt.scaled[1]);
            const double cont = phi_cdf(-u / gt.beta_gen);
            CHECK(std::fabs(success + cont - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("oracle search enumerates feasible trajectories exhaustively") {
    FlowShape shape{3, {3, 3, 3}};
    Rng rng(23);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, rng);
    const auto [traj, value] = oracle_best(gt, {}, FlowConstraints{});
    // Cross-check against the independent enumeration oracle.
    const auto best = oracle::enumerate_best(
        shape, [](int, int, int) { return true; },
        [&](int page, int prev, int action) {
            return gt.success_prob(page, {}, page == 0 ? std::nullopt : std::optional<int>(prev),
                                   action);
        });
    CHECK(value == doctest::Approx(best.value).epsilon(1e-14));
    CHECK(traj == best.trajectory);
    CHECK(expected_g(gt, {}, traj) == doctest::Approx(value).epsilon(1e-14));
}

TEST_CASE("a dominant interaction weight steers the oracle through its pair") {
    GroundTruth gt = fixed_prob_truth({0.1, 0.1});
    // Find the (prev=1, cur=1) interaction column on page 2 and boost it.
    const auto labels = gt.forms[1].column_labels();
    for (std::size_t col = 0; col < labels.size(); ++col) {
        if (labels[col].term == "previous_by_current" && labels[col].previous == 1 &&
            labels[col].current == 1) {
            gt.scaled[1][col] = 40.0;
        }
    }
    const auto [traj, value] = oracle_best(gt, {}, FlowConstraints{});
    CHECK(traj == std::vector<int>{1, 1});
    CHECK(value > 0.9);
}

TEST_CASE("single-page oracle is an argmax over that page") {
    FlowShape shape{1, {4}};
    Rng rng(29);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.3, rng);
    const auto [traj, value] = oracle_best(gt, {}, FlowConstraints{});
    for (int a = 0; a < 4; ++a) {
        CHECK(value >= gt.success_prob(0, {}, std::nullopt, a));
    }
    CHECK(value == gt.success_prob(0, {}, std::nullopt, traj[0]));
}

TEST_CASE("oracle guards against combinatorial blowup") {
    FlowShape shape{21, std::vector<int>(21, 2)};
    Rng rng(31);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, rng);
    CHECK_THROWS_AS(oracle_best(gt, {}, FlowConstraints{}), std::invalid_argument);
}

TEST_CASE("realization stops at the first success") {
    const GroundTruth sure = fixed_prob_truth({1.0, 0.5, 0.5});
    Rng rng(3);
    const std::vector<int> traj{0, 0, 0};
    const StepOutcome out = realize(sure, {}, traj, rng);
    CHECK(out.presented.size() == 1);
    CHECK(out.presented[0] == std::pair<int, int>{0, 0});
    CHECK(out.rewards == std::vector<int>{1});
    CHECK(out.g == 1);
    CHECK(out.terminal.kind == FlowState::Kind::exit_success);

    const GroundTruth never = fixed_prob_truth({0.0, 0.0, 0.0});
    Rng rng2(3);
    const StepOutcome none = realize(never, {}, traj, rng2);
    CHECK(none.presented.size() == 3);
    CHECK(none.rewards == std::vector<int>{0, 0, 0});
    CHECK(none.g == 0);
    CHECK(none.terminal.kind == FlowState::Kind::end_no_success);
}

TEST_CASE("realization replays identically under the same seed") {
    FlowShape shape{3, {2, 2, 2}};
    Rng gen(41);
    const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.3, gen);
    Rng a(99), b(99);
    for (int i = 0; i < 50; ++i) {
        const std::vector<int> fixed_traj{1, 0, 1};
        const StepOutcome oa = realize(gt, {}, fixed_traj, a);
        const StepOutcome ob = realize(gt, {}, fixed_traj, b);
        CHECK(oa.presented == ob.presented);
        CHECK(oa.rewards == ob.rewards);
        CHECK(oa.g == ob.g);
    }
}

TEST_CASE("monte carlo realization means agree with expected_g") {
    Rng pick(60);
    for (int instance = 0; instance < 5; ++instance) {
        FlowShape shape{3, {2, 2, 2}};
        Rng gen(600 + instance);
        const GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.15, gen);
        const std::vector<int> traj{pick.uniform_int(2), pick.uniform_int(2), pick.uniform_int(2)};
        const double expect = expected_g(gt, {}, traj);
        Rng draw(6000 + instance);
        const int n = 100000;
        long long hits = 0;
        for (int i = 0; i < n; ++i) hits += realize(gt, {}, traj, draw).g;
        const double se = std::sqrt(expect * (1.0 - expect) / n);
        CHECK(std::fabs(static_cast<double>(hits) / n - expect) <= 4.0 * se + 1e-12);
    }
}

TEST_CASE("raising an intercept never lowers expected_g through that page") {
    Rng rng(71);
    for (int trial = 0; trial < 50; ++trial) {
        FlowShape shape{3, {2, 2, 2}};
        Rng gen(7100 + trial);
        GroundTruth gt = sample_ground_truth(shape, ContextSchema{}, 1.0, 1.0, 2.0, 0.1, gen);
        const std::vector<int> traj{rng.uniform_int(2), rng.uniform_int(2), rng.uniform_int(2)};
        const double before = expected_g(gt, {}, traj);
        gt.scaled[static_cast<std::size_t>(rng.uniform_int(3))][0] += 0.7;
        CHECK(expected_g(gt, {}, traj) >= before - 1e-15);
    }
}

TEST_CASE("contextual generator separates categories") {
    FlowShape shape{2, {2, 2}};
    ContextSchema ctx{ContextSchema::Kind::categorical, 3};
    Rng gen(83);
    const GroundTruth gt = sample_ground_truth(shape, ctx, 1.0, 1.0, 2.0, 0.1, gen);
    CHECK(gt.forms[0].columns() == 1 + 2 + 3);
    CHECK(gt.forms[1].columns() == 1 + 2 + 3 + 2 + 4 + 6);
    // Different categories generally shift the utility.
    const auto e0 = ctx.encode(0);
    const auto e1 = ctx.encode(1);
    CHECK(gt.success_prob(0, e0, std::nullopt, 0) != gt.success_prob(0, e1, std::nullopt, 0));
}

TEST_CASE("flow states validate their shape") {
    CHECK(FlowState::start().kind == FlowState::Kind::start);
    CHECK(!FlowState::start().terminal());
    CHECK(FlowState::exit_success().terminal());
    CHECK(FlowState::end_no_success().terminal());
    const FlowState at = FlowState::at_page(2, 1);
    CHECK(at.page == 2);
    CHECK(at.prev_action == 1);
    CHECK_THROWS_AS(FlowState::at_page(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(FlowState::at_page(2, -1), std::invalid_argument);
}
