#include "steerdns/exp3.hpp"
#include "steerdns/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace steerdns;

TEST_CASE("address family other() is an involution") {
    CHECK(other(AddressFamily::V4) == AddressFamily::V6);
    CHECK(other(AddressFamily::V6) == AddressFamily::V4);
    CHECK(other(other(AddressFamily::V4)) == AddressFamily::V4);
    CHECK(other(other(AddressFamily::V6)) == AddressFamily::V6);
}

TEST_CASE("fresh state splits probability evenly") {
    for (const double gamma : {0.1, 1.0, 0.37}) {
        const Exp3 bandit(gamma);
        const auto p = bandit.probabilities();
        CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("gamma outside (0, 1] is rejected") {
    CHECK_THROWS_AS(Exp3(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Exp3(-0.2), std::invalid_argument);
    CHECK_THROWS_AS(Exp3(1.01), std::invalid_argument);
    CHECK_NOTHROW(Exp3(1.0));
    CHECK_NOTHROW(Exp3(1e-9));
}

TEST_CASE("probabilities follow the mixing formula") {
    // weights (3, 1), gamma 0.1: p_v4 = 0.9 * 0.75 + 0.05 = 0.725.
    const Exp3 skewed(0.1, {3.0, 1.0});
    CHECK(skewed.probabilities()[0] == doctest::Approx(0.725).epsilon(1e-12));
    CHECK(skewed.probabilities()[1] == doctest::Approx(0.275).epsilon(1e-12));

    const Exp3 explore(1.0, {3.0, 1.0});
    CHECK(explore.probabilities()[0] == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(Exp3(0.1, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Exp3(0.1, {1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("choose threshold applies to a skewed state") {
    const Exp3 bandit(0.1, {3.0, 1.0}); // p_v4 = 0.725
    CHECK(bandit.choose(0.10) == AddressFamily::V4);
    CHECK(bandit.choose(0.80) == AddressFamily::V6);
}

TEST_CASE("choose follows the strict-inequality boundary") {
    Exp3 bandit(0.1);
    // p_v4 = 0.5 on a fresh state.
    CHECK(bandit.choose(0.10) == AddressFamily::V4);
    CHECK(bandit.choose(0.49999) == AddressFamily::V4);
    CHECK(bandit.choose(0.5) == AddressFamily::V6);
    CHECK(bandit.choose(0.80) == AddressFamily::V6);
}

TEST_CASE("zero gain leaves probabilities bit-identical") {
    Exp3 bandit(0.1);
    bandit.update(AddressFamily::V4, 1.0);
    const auto before = bandit.probabilities();
    const auto weights_before = bandit.weights();
    bandit.update(AddressFamily::V4, 0.0);
    bandit.update(AddressFamily::V6, 0.0);
    const auto after = bandit.probabilities();
    CHECK(before[0] == after[0]);
    CHECK(before[1] == after[1]);
    CHECK(bandit.weights()[0] == weights_before[0]);
    CHECK(bandit.weights()[1] == weights_before[1]);
}

TEST_CASE("single full-gain update matches the hand-evaluated formula") {
    // From the fresh state p_v4 = 0.5, so the importance-weighted gain is
    // 2 and the weight factor is exp(0.1 * 2 / 2) = exp(0.1).
    Exp3 bandit(0.1);
    bandit.update(AddressFamily::V4, 1.0);
    const double e = std::exp(0.1);
    CHECK(e == doctest::Approx(1.10517).epsilon(1e-5));
    const double expected_p_v4 = 0.9 * (e / (e + 1.0)) + 0.05;
    CHECK(bandit.probabilities()[0] == doctest::Approx(expected_p_v4).epsilon(1e-12));
    CHECK(bandit.probabilities()[0] == doctest::Approx(0.5225).epsilon(1e-4));
}

TEST_CASE("gain outside [0, 1] is rejected") {
    Exp3 bandit(0.5);
    CHECK_THROWS_AS(bandit.update(AddressFamily::V4, -0.01), std::invalid_argument);
    CHECK_THROWS_AS(bandit.update(AddressFamily::V4, 1.01), std::invalid_argument);
    CHECK_THROWS_AS(bandit.update(AddressFamily::V4, std::nan("")), std::invalid_argument);
}

TEST_CASE("sixty winning updates push probability past 0.9") {
    Exp3 bandit(0.1);
    for (int i = 0; i < 60; ++i) {
        bandit.update(AddressFamily::V4, 1.0);
    }
    CHECK(bandit.probabilities()[0] >= 0.9);
}

TEST_CASE("update with full gain strictly increases the chosen probability") {
    SplitMix64 rng(0xA11CE);
    for (int trial = 0; trial < 200; ++trial) {
        const double gamma = 0.05 + 0.9 * rng.next_double();
        Exp3 bandit(gamma);
        for (int step = 0; step < 30; ++step) {
            const auto action =
                rng.next_double() < 0.5 ? AddressFamily::V4 : AddressFamily::V6;
            bandit.update(action, rng.next_double());
        }
        const auto action = rng.next_double() < 0.5 ? AddressFamily::V4 : AddressFamily::V6;
        const double before = bandit.probability(action);
        bandit.update(action, 1.0);
        if (before < 1.0 - gamma / 2.0 - 1e-9) {
            CHECK(bandit.probability(action) > before);
        }
    }
}

TEST_CASE("probability floor and normalization hold under random updates") {
    SplitMix64 rng(0xF100D);
    for (int trial = 0; trial < 500; ++trial) {
        const double gamma = 0.01 + 0.99 * rng.next_double();
        Exp3 bandit(gamma);
        for (int step = 0; step < 50; ++step) {
            const auto action =
                rng.next_double() < 0.5 ? AddressFamily::V4 : AddressFamily::V6;
            bandit.update(action, rng.next_double());
            const auto p = bandit.probabilities();
            CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(p[0] >= gamma / 2.0 - 1e-9);
            CHECK(p[1] >= gamma / 2.0 - 1e-9);
            CHECK(bandit.weights()[0] > 0.0);
            CHECK(bandit.weights()[1] > 0.0);
            CHECK(std::isfinite(bandit.weights()[0]));
            CHECK(std::isfinite(bandit.weights()[1]));
        }
    }
}

TEST_CASE("gamma = 1 never leaves pure exploration") {
    Exp3 bandit(1.0);
    SplitMix64 rng(7);
    for (int i = 0; i < 100; ++i) {
        bandit.update(rng.next_double() < 0.5 ? AddressFamily::V4 : AddressFamily::V6,
                      rng.next_double());
        CHECK(bandit.probabilities()[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("identical sample and gain streams give identical states") {
    auto run = [] {
        Exp3 bandit(0.1);
        RewardContext ctx;
        SplitMix64 rng(42);
        for (int i = 0; i < 200; ++i) {
            const auto family = bandit.choose(rng.next_double());
            const double metric = 10.0 + 100.0 * rng.next_double();
            bandit.update(family, compute_gain(family, metric, ctx));
        }
        return bandit.weights();
    };
    const auto a = run();
    const auto b = run();
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
}

TEST_CASE("comparative gain rewards beating the other family's last metric") {
    RewardContext ctx;

    SUBCASE("first observation wins by the missing-comparison convention") {
        CHECK(compute_gain(AddressFamily::V4, 50.0, ctx) == 1.0);
        CHECK(ctx.last(AddressFamily::V4) == 50.0);
        CHECK_FALSE(ctx.last(AddressFamily::V6).has_value());
    }

    SUBCASE("beats the other family's last observation") {
        ctx.last_ms[family_index(AddressFamily::V4)] = 100.0;
        CHECK(compute_gain(AddressFamily::V6, 80.0, ctx) == 1.0);
        CHECK(ctx.last(AddressFamily::V6) == 80.0);
    }

    SUBCASE("loses to the other family's last observation") {
        ctx.last_ms[family_index(AddressFamily::V4)] = 100.0;
        CHECK(compute_gain(AddressFamily::V6, 120.0, ctx) == 0.0);
        CHECK(ctx.last(AddressFamily::V6) == 120.0);
    }

    SUBCASE("equality earns no gain") {
        ctx.last_ms[family_index(AddressFamily::V4)] = 100.0;
        CHECK(compute_gain(AddressFamily::V6, 100.0, ctx) == 0.0);
    }

    SUBCASE("non-positive metrics are rejected") {
        CHECK_THROWS_AS(compute_gain(AddressFamily::V4, 0.0, ctx), std::invalid_argument);
        CHECK_THROWS_AS(compute_gain(AddressFamily::V4, -5.0, ctx), std::invalid_argument);
    }

    SUBCASE("only the chosen family's slot is overwritten") {
        ctx.last_ms[family_index(AddressFamily::V4)] = 100.0;
        compute_gain(AddressFamily::V6, 80.0, ctx);
        CHECK(ctx.last(AddressFamily::V4) == 100.0);
    }
}
