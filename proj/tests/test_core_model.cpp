#include "doctest.h"

#include "ztbench/core_model.hpp"
#include "ztbench/errors.hpp"
#include "ztbench/rng.hpp"

#include <cmath>
#include <limits>

using namespace ztbench;

TEST_CASE("clip") {
    CHECK(clip(0.5) == 0.5);
    CHECK(clip(1.3) == 1.0);
    CHECK(clip(-0.2) == 0.0);
    CHECK_THROWS_WITH(clip(std::numeric_limits<double>::quiet_NaN()), "non-finite trust value");
    CHECK_THROWS_WITH(clip(std::numeric_limits<double>::infinity()), "non-finite trust value");
}

TEST_CASE("g_map") {
    CHECK(g_map(0.0) == 1.0);
    CHECK(g_map(1.0) == 0.0);
    CHECK(g_map(0.3) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS(g_map(-0.01));
    CHECK_THROWS(g_map(1.01));
}

TEST_CASE("update_trust") {
    CHECK(update_trust(1.0, 0.0, 0.1) == 1.0);
    CHECK(update_trust(1.0, 1.0, 0.1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(update_trust(0.5, 0.5, 0.2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(update_trust(0.3, 0.2, 1.0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK_THROWS_AS(update_trust(0.5, 0.5, 0.0), ConfigError);
    CHECK_THROWS_AS(update_trust(0.5, 0.5, 1.5), ConfigError);
    CHECK_THROWS(update_trust(1.2, 0.5, 0.1));
    CHECK_THROWS(update_trust(0.5, -0.1, 0.1));
}

TEST_CASE("composite_trust") {
    const auto even = TrustWeights(0.25, 0.25, 0.25, 0.25);
    CHECK(composite_trust(even, 1, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(composite_trust(even, 0, 0, 1, 0) == 0.0);
    CHECK(composite_trust(even, 0.8, 0.6, 0.4, 0.5) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK_THROWS(composite_trust(even, 1.1, 0.5, 0.5, 0.5));
    CHECK_THROWS(composite_trust(even, 0.5, 0.5, -0.5, 0.5));

    const TrustWeights identity_only(1, 0, 0, 0);
    for (double i : {0.0, 0.137, 0.5, 0.999, 1.0}) CHECK(composite_trust(identity_only, i, 0.3, 0.9, 0.2) == i);
}

TEST_CASE("weights and adaptation validation") {
    CHECK_THROWS_AS(TrustWeights(0.5, 0.5, 0.5, 0.5), ConfigError);
    CHECK_THROWS_AS(TrustWeights(-0.1, 0.5, 0.4, 0.2), ConfigError);
    const TrustWeights d;
    CHECK(d.identity() == 0.30);
    CHECK(d.device() == 0.25);
    CHECK(d.risk() == 0.25);
    CHECK(d.context() == 0.20);
    const auto n = TrustWeights::normalized(3, 2.5, 2.5, 2);
    CHECK(n.identity() == doctest::Approx(0.3).epsilon(1e-15));

    AdaptationParams a;
    CHECK_NOTHROW(a.validate());
    a.eta_device = 0.0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = {};
    a.epsilon = 0.0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
}

TEST_CASE("trust state reads prior and clips writes") {
    TrustState s(0.8);
    CHECK(s.get(user_id(4)) == 0.8);
    CHECK_FALSE(s.contains(user_id(4)));
    s.set(user_id(4), 1.7);
    CHECK(s.get(user_id(4)) == 1.0);
    s.set(device_id(4), -3.0);
    CHECK(s.get(device_id(4)) == 0.0);
    // Same index under a different kind is a different entity.
    CHECK(s.get(context_id(4)) == 0.8);
    CHECK(s.size() == 2);
    s.reset();
    CHECK(s.size() == 0);
}

TEST_CASE("property: range preservation") {
    Rng rng(101);
    for (int i = 0; i < 20000; ++i) {
        const double cur = rng.uniform(), s = rng.uniform(), eta = 1.0 - rng.uniform();
        const double u = update_trust(cur, s, eta);
        REQUIRE(u >= 0.0);
        REQUIRE(u <= 1.0);
        const auto w = TrustWeights::normalized(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform() + 1e-3);
        const double t = composite_trust(w, rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
        REQUIRE(t >= 0.0);
        REQUIRE(t <= 1.0);
    }
}

TEST_CASE("property: geometric convergence at rate 1 - eta") {
    Rng rng(202);
    for (int c = 0; c < 2000; ++c) {
        const double eta = rng.uniform(0.01, 1.0);
        const double anomaly = rng.bernoulli(0.5) ? 0.0 : 1.0;
        const double limit = 1.0 - anomaly;
        double x = rng.uniform();
        for (int step = 0; step < 20; ++step) {
            const double next = update_trust(x, anomaly, eta);
            REQUIRE(std::abs(std::abs(next - limit) - (1.0 - eta) * std::abs(x - limit)) <= 1e-12);
            if (anomaly == 0.0) REQUIRE(next >= x);
            else REQUIRE(next <= x);
            x = next;
        }
    }
}

TEST_CASE("property: composite trust monotonicity") {
    Rng rng(303);
    for (int c = 0; c < 10000; ++c) {
        const auto w = TrustWeights::normalized(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform() + 1e-3);
        double v[4] = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        const double base = composite_trust(w, v[0], v[1], v[2], v[3]);
        const int k = static_cast<int>(rng.below(4));
        const double delta = rng.uniform() * (1.0 - v[k]);
        v[k] += delta;
        const double bumped = composite_trust(w, v[0], v[1], v[2], v[3]);
        // Raising I, D or C never lowers theta; raising R never raises it.
        if (k == 2) REQUIRE(bumped <= base + 1e-15);
        else REQUIRE(bumped >= base - 1e-15);
    }
}

TEST_CASE("property: composite trust linearity and weight rescaling") {
    Rng rng(404);
    for (int c = 0; c < 10000; ++c) {
        const double wi = rng.uniform(), wd = rng.uniform(), wr = rng.uniform(), wc = rng.uniform() + 1e-3;
        const auto w = TrustWeights::normalized(wi, wd, wr, wc);
        double x[4], y[4], m[4];
        const double a = rng.uniform();
        for (int k = 0; k < 4; ++k) {
            x[k] = rng.uniform();
            y[k] = rng.uniform();
            m[k] = a * x[k] + (1.0 - a) * y[k];
        }
        const double tx = composite_trust(w, x[0], x[1], x[2], x[3]);
        const double ty = composite_trust(w, y[0], y[1], y[2], y[3]);
        const double tm = composite_trust(w, m[0], m[1], m[2], m[3]);
        REQUIRE(std::abs(tm - (a * tx + (1.0 - a) * ty)) <= 1e-12);

        const double scale = rng.uniform(0.1, 50.0);
        const auto rescaled = TrustWeights::normalized(wi * scale, wd * scale, wr * scale, wc * scale);
        REQUIRE(std::abs(composite_trust(rescaled, x[0], x[1], x[2], x[3]) - tx) <= 1e-12);
    }
}
