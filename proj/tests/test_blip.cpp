#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "linflow/blip.hpp"
#include "linflow/probit.hpp"
#include "linflow/rng.hpp"
#include "oracles.hpp"

using namespace linflow;

TEST_CASE("new posterior initialisation and argument checks") {
    GaussianPosterior p(3, 0.0, 1.0, 1.0);
    CHECK(p.dim() == 3);
    CHECK(p.mean() == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(p.variance() == std::vector<double>{1.0, 1.0, 1.0});

    GaussianPosterior q(1, 0.5, 2.0, 5.0);
    CHECK(q.mean() == std::vector<double>{0.5});
    CHECK(q.variance() == std::vector<double>{2.0});
    CHECK(q.beta() == 5.0);

    CHECK_THROWS_AS(GaussianPosterior(0, 0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianPosterior(2, 0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianPosterior(2, 0.0, 1.0, 0.0), std::invalid_argument);

    // Snapshot form.
    GaussianPosterior s({0.5, -0.5}, {1.0, 2.0}, 3.0);
    CHECK(s.dim() == 2);
    CHECK(s.beta() == 3.0);
    CHECK_THROWS_AS(GaussianPosterior({0.5}, {1.0, 2.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianPosterior({0.5, 0.5}, {1.0, -1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("sampling is seeded and degenerate variance collapses to the mean") {
    GaussianPosterior p(2, 0.25, 1.0, 1.0);
    Rng a(42), b(42);
    CHECK(p.sample_weights(a) == p.sample_weights(b));

    GaussianPosterior tight(2, 0.25, 1e-30, 1.0);
    Rng rng(7);
    for (double w : tight.sample_weights(rng)) {
        CHECK(std::fabs(w - 0.25) <= 1e-12);
    }
}

TEST_CASE("sampling matches the posterior moments in the large-sample limit") {
    GaussianPosterior p(1, 0.0, 1.0, 1.0);
    Rng rng(123);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = p.sample_weights(rng)[0];
        sum += w;
        sum_sq += w * w;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) <= 0.02);
    CHECK(std::fabs(var - 1.0) <= 0.05);
}

TEST_CASE("predict_success is the probit of the scaled utility") {
    GaussianPosterior p(2, 0.0, 1.0, 2.0);
    const std::vector<double> zero{0.0, 0.0};
    const std::vector<double> b{1.0, 1.0};
    CHECK(p.predict_success(zero, b) == 0.5);

    const std::vector<double> w{1.0, 1.0};  // b.w = 2 = beta
    CHECK(p.predict_success(w, b) == doctest::Approx(0.8413447460685429).epsilon(1e-14));

    // Phi(-t) = 1 - Phi(t): predicting with negated weights complements.
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> wr{rng.gaussian(), rng.gaussian()};
        std::vector<double> neg{-wr[0], -wr[1]};
        CHECK(p.predict_success(neg, b) ==
              doctest::Approx(1.0 - p.predict_success(wr, b)).epsilon(1e-12));
    }

    const std::vector<double> short_b{1.0};
    CHECK_THROWS_AS(p.predict_success(w, short_b), std::invalid_argument);
}

TEST_CASE("single update against the closed-form skew-normal moments") {
    GaussianPosterior p(1, 0.0, 1.0, 1.0);
    p.update({{1.0}, true});
    // Posterior of N(0,1) tilted by Phi(w): mean 1/sqrt(pi), var 1 - 1/pi.
    CHECK(p.mean()[0] == doctest::Approx(0.5641895835477563).epsilon(1e-12));
    CHECK(p.variance()[0] == doctest::Approx(0.6816901138162093).epsilon(1e-12));

    GaussianPosterior q(1, 0.0, 1.0, 1.0);
    q.update({{1.0}, false});
    CHECK(q.mean()[0] == doctest::Approx(-0.5641895835477563).epsilon(1e-12));
    CHECK(q.variance()[0] == doctest::Approx(p.variance()[0]).epsilon(1e-15));
}

TEST_CASE("zero feature coordinates are untouched") {
    GaussianPosterior p(3, 0.25, 0.8, 1.0);
    p.update({{0.0, 1.0, 0.0}, true});
    CHECK(p.mean()[0] == 0.25);
    CHECK(p.variance()[0] == 0.8);
    CHECK(p.mean()[2] == 0.25);
    CHECK(p.variance()[2] == 0.8);
    CHECK(p.mean()[1] > 0.25);
    CHECK(p.variance()[1] < 0.8);
}

TEST_CASE("batch update folds sequentially and is order-sensitive") {
    const Observation plus{{1.0, -0.5}, true};
    const Observation minus{{1.0, -0.5}, false};

    GaussianPosterior base(2, 0.0, 1.0, 1.0);
    GaussianPosterior empty = base;
    empty.update_batch(std::vector<Observation>{});
    CHECK(empty.mean() == base.mean());
    CHECK(empty.variance() == base.variance());

    GaussianPosterior single = base;
    single.update_batch(std::vector<Observation>{plus});
    GaussianPosterior manual = base;
    manual.update(plus);
    CHECK(single.mean() == manual.mean());
    CHECK(single.variance() == manual.variance());

    GaussianPosterior ab = base, ba = base;
    ab.update_batch(std::vector<Observation>{plus, minus});
    ba.update_batch(std::vector<Observation>{minus, plus});
    GaussianPosterior chained = base;
    chained.update(plus);
    chained.update(minus);
    CHECK(ab.mean() == chained.mean());
    CHECK(ab.variance() == chained.variance());
    CHECK(ab.mean() != ba.mean());
}

TEST_CASE("variance shrinks monotonically under updates") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 1 + rng.uniform_int(5);
        GaussianPosterior p(dim, 0.0, 1.0, 1.0);
        for (int step = 0; step < 10; ++step) {
            Observation obs;
            obs.features.resize(static_cast<std::size_t>(dim));
            for (double& f : obs.features) {
                f = rng.uniform() < 0.3 ? 0.0 : rng.gaussian();
            }
            obs.label = rng.uniform() < 0.5;
            const auto before = p.variance();
            p.update(obs);
            for (int j = 0; j < dim; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (obs.features[ju] == 0.0) {
                    CHECK(p.variance()[ju] == before[ju]);
                } else {
                    CHECK(p.variance()[ju] < before[ju]);
                    CHECK(p.variance()[ju] > 0.0);
                }
            }
        }
    }
}

TEST_CASE("closed-form update matches the numerical moment-matching oracle") {
    Rng rng(2024);
    int done = 0;
    while (done < 200) {
        const int dim = 1 + rng.uniform_int(5);
        std::vector<double> mu(static_cast<std::size_t>(dim)), nu(static_cast<std::size_t>(dim)),
            b(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            mu[ju] = -1.0 + 2.0 * rng.uniform();
            nu[ju] = 0.25 + 1.25 * rng.uniform();
            b[ju] = rng.uniform() < 0.2 ? 0.0 : -1.5 + 3.0 * rng.uniform();
        }
        const double beta = 0.8 + 0.8 * rng.uniform();
        const double y = rng.uniform() < 0.5 ? 1.0 : -1.0;

        double dot = 0.0, s2 = beta * beta;
        for (int j = 0; j < dim; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            dot += b[ju] * mu[ju];
            s2 += b[ju] * b[ju] * nu[ju];
        }
        // Keep the prediction surprise moderate so the quadrature stays
        // well-conditioned (the acceptance protocol never leaves this zone).
        if (std::fabs(y * dot / std::sqrt(s2)) > 3.5) continue;
        bool any = false;
        for (double f : b) any = any || f != 0.0;
        if (!any) continue;

        GaussianPosterior p(mu, nu, beta);
        p.update({FeatureVector(b), y > 0.0});
        const auto moments = oracle::tilted_moments(mu, nu, b, y, beta);
        for (int j = 0; j < dim; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            CHECK(std::fabs(p.mean()[ju] - moments.mean[ju]) <= 1e-6);
            CHECK(std::fabs(p.variance()[ju] - moments.variance[ju]) <= 1e-6);
        }
        ++done;
    }
}

TEST_CASE("parameter recovery from probit-generated labels") {
    const int dim = 5;
    std::vector<double> truth{1.0, -1.0, 1.0, 1.0, -1.0};
    GaussianPosterior p(dim, 0.0, 1.0, 1.0);
    Rng rng(31337);
    for (int step = 0; step < 20000; ++step) {
        Observation obs;
        obs.features.resize(dim);
        double dot = 0.0;
        for (int j = 0; j < dim; ++j) {
            obs.features[static_cast<std::size_t>(j)] = rng.uniform() < 0.5 ? 1.0 : -1.0;
            dot += obs.features[static_cast<std::size_t>(j)] * truth[static_cast<std::size_t>(j)];
        }
        obs.label = rng.bernoulli(phi_cdf(dot));
        p.update(obs);
    }
    for (int j = 0; j < dim; ++j) {
        CHECK(std::fabs(p.mean()[static_cast<std::size_t>(j)] - truth[static_cast<std::size_t>(j)]) <= 0.15);
    }
}

TEST_CASE("identical seed and observations give a bit-identical posterior") {
    auto build = [] {
        GaussianPosterior p(3, 0.0, 1.0, 1.0);
        Rng rng(555);
        for (int i = 0; i < 200; ++i) {
            Observation obs;
            obs.features = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
            obs.label = rng.uniform() < 0.4;
            p.update(obs);
        }
        return p;
    };
    const GaussianPosterior a = build();
    const GaussianPosterior b = build();
    CHECK(a.mean() == b.mean());
    CHECK(a.variance() == b.variance());
}
