#include "doctest.h"

#include "oracle.hpp"

#include "ztbench/errors.hpp"
#include "ztbench/harness.hpp"
#include "ztbench/metrics.hpp"
#include "ztbench/rng.hpp"

#include <cmath>
#include <vector>

using namespace ztbench;

namespace {

const std::vector<double> kTau{0.25, 0.5, 0.75};

DecisionRecord rec(std::uint64_t t, std::uint32_t user, bool attack, Action a, bool automated = true) {
    DecisionRecord r;
    r.time_index = t;
    r.user = user_id(user);
    if (attack) r.scenario = ScenarioKind::credential_compromise;
    r.action = a;
    r.automated = automated;
    if (automated && a != Action::allow) r.confirmed_correct = attack;
    return r;
}

} // namespace

TEST_CASE("delta_identity") {
    CHECK(delta_identity(0.8, 0.4, 1e-6) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(delta_identity(0.7, 0.7, 1e-6) == 0.0);
    CHECK(delta_identity(0.0, 0.0, 1e-6) == 0.0);
    CHECK(delta_identity(0.4, 0.8, 1e-6) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK_THROWS(delta_identity(1.2, 0.5, 1e-6));
}

TEST_CASE("ital examples") {
    TrustTrajectories one{{0, {{0, 0.8}, {1, 0.6}, {2, 0.4}}}};
    std::vector<WindowAnchor> a{{0, 0}};
    CHECK(ital(one, a, 3, 1e-6) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ital(one, {}, 3, 1e-6) == 0.0);
    // Truncated at the end of the trajectory.
    CHECK(ital(one, a, 10, 1e-6) == doctest::Approx(0.5).epsilon(1e-15));

    TrustTrajectories two{{0, {{0, 0.8}, {5, 0.4}}}, {1, {{2, 1.0}, {3, 0.9}}}};
    std::vector<WindowAnchor> both{{0, 0}, {1, 2}};
    CHECK(ital(two, both, 2, 1e-6) == doctest::Approx(0.3).epsilon(1e-12));

    CHECK_THROWS_WITH(ital({}, a, 3, 1e-6), "no trajectories");
    CHECK_THROWS_AS(ital(one, a, 1, 1e-6), ConfigError);
}

TEST_CASE("ital is invariant under a uniform time shift") {
    TrustTrajectories base{{0, {{0, 0.9}, {3, 0.7}, {4, 0.5}, {9, 0.45}}}, {1, {{1, 0.8}, {2, 0.6}}}};
    std::vector<WindowAnchor> anchors{{0, 3}, {1, 1}};
    TrustTrajectories shifted;
    for (const auto& [u, traj] : base)
        for (auto p : traj) shifted[u].push_back({p.time_index + 1000, p.score});
    std::vector<WindowAnchor> moved{{0, 1003}, {1, 1001}};
    CHECK(ital(base, anchors, 3, 1e-6) == ital(shifted, moved, 3, 1e-6));
}

TEST_CASE("tii") {
    std::vector<ServiceCount> one{{1.0, 10, 10}};
    CHECK(tii(one) == 1.0);
    std::vector<ServiceCount> two{{1.0, 10, 10}, {2.0, 5, 10}};
    CHECK(tii(two) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    std::vector<ServiceCount> none{{1.0, 0, 4}, {3.0, 0, 7}};
    CHECK(tii(none) == 0.0);
    std::vector<ServiceCount> empty{{1.0, 0, 0}};
    CHECK_THROWS_WITH(tii(empty), "no transactions");

    Rng rng(9);
    for (int c = 0; c < 1000; ++c) {
        std::vector<ServiceCount> eq;
        std::uint64_t v = 0, t = 0;
        for (int s = 0; s < 5; ++s) {
            const auto total = rng.below(50) + 1;
            const auto valid = rng.below(total + 1);
            eq.push_back({1.7, valid, total});
            v += valid;
            t += total;
        }
        const double x = tii(eq);
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 1.0);
        REQUIRE(std::abs(x - static_cast<double>(v) / static_cast<double>(t)) <= 1e-12);
    }
}

TEST_CASE("sae, acf, sae_star") {
    CHECK(sae(100, 43) == doctest::Approx(0.43).epsilon(1e-15));
    CHECK(sae(100, 0) == 0.0);
    CHECK(sae(0, 0) == 0.0);
    CHECK_THROWS(sae(3, 4));

    CHECK(acf(50, 45) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(acf(50, 50) == 1.0);
    CHECK(acf(0, 0) == 0.0);
    CHECK_THROWS(acf(5, 6));

    CHECK(sae_star(0.43, 1.0) == doctest::Approx(0.43).epsilon(1e-15));
    CHECK(sae_star(0.43, 0.9) == doctest::Approx(0.387).epsilon(1e-14));
    CHECK(sae_star(0.0, 0.77) == 0.0);
}

TEST_CASE("fts and risk bands") {
    CHECK(fts(0, 0, 0) == 0.0);
    CHECK(fts(1, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(fts(0.4, 0.5, 0.3) == doctest::Approx(0.41).epsilon(1e-14));
    CHECK_THROWS_AS(fts(0.1, 0.1, 0.1, FtsWeights{0.5, 0.5, 0.5}), ConfigError);

    CHECK(risk_band(0.0, kTau) == 1);
    CHECK(risk_band(0.41, kTau) == 2);
    CHECK(risk_band(0.75, kTau) == 4);
    // Each threshold belongs to the band above it.
    CHECK(risk_band(0.25, kTau) == 2);
    CHECK(risk_band(0.5, kTau) == 3);
    CHECK(risk_band(std::nextafter(0.25, 0.0), kTau) == 1);
    CHECK(risk_band(std::nextafter(0.75, 0.0), kTau) == 3);
    CHECK(risk_band(1.0, kTau) == 4);

    const std::vector<double> bad{0.5, 0.25};
    CHECK_THROWS_AS(validate_band_thresholds(bad), ConfigError);
    CHECK_THROWS_AS(risk_band(0.3, bad), ConfigError);

    Rng rng(12);
    for (int c = 0; c < 10000; ++c) {
        const double f = fts(rng.uniform(), rng.uniform(), rng.uniform());
        REQUIRE(f >= 0.0);
        REQUIRE(f <= 1.0);
        const int b = risk_band(f, kTau);
        REQUIRE(b >= 1);
        REQUIRE(b <= 4);
        const double lo = b == 1 ? 0.0 : kTau[b - 2];
        const double hi = b == 4 ? 2.0 : kTau[b - 1];
        REQUIRE(f >= lo);
        REQUIRE(f < hi);
    }
}

TEST_CASE("trp and ass") {
    CHECK(trp(1000, 0.2, 100) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(trp(0, 0.3, 7) == 0.0);
    CHECK(trp(500, 1.0, 500) == 1.0);
    CHECK_THROWS(trp(1, 0.5, 0));

    CHECK(ass(5, 5) == 1.0);
    CHECK(ass(0, 5) == 0.0);
    CHECK(ass(3, 5) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS(ass(6, 5));
}

TEST_CASE("confusion metrics") {
    std::vector<DecisionRecord> perfect{rec(0, 0, true, Action::block), rec(1, 1, false, Action::allow),
                                        rec(2, 2, true, Action::step_up)};
    auto p = confusion_metrics(perfect);
    CHECK(*p.precision == 1.0);
    CHECK(*p.recall == 1.0);
    CHECK(*p.f1 == 1.0);

    std::vector<DecisionRecord> quiet{rec(0, 0, true, Action::allow), rec(1, 1, false, Action::allow)};
    auto q = confusion_metrics(quiet);
    CHECK(*q.recall == 0.0);
    CHECK_FALSE(q.precision.has_value());
    CHECK_FALSE(q.f1.has_value());

    std::vector<DecisionRecord> mix;
    std::uint64_t t = 0;
    for (int i = 0; i < 5; ++i) mix.push_back(rec(t++, 0, true, Action::block));
    for (int i = 0; i < 15; ++i) mix.push_back(rec(t++, 1, false, Action::step_up));
    for (int i = 0; i < 5; ++i) mix.push_back(rec(t++, 2, true, Action::allow));
    auto m = confusion_metrics(mix);
    CHECK(*m.precision == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(*m.recall == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(*m.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("accumulator on a hand-built log") {
    MetricsParams params;
    params.services = {{"a", 1.0}, {"b", 2.0}};
    params.ital_window = 3;
    MetricsAccumulator acc(params);

    std::vector<DecisionRecord> log;
    auto push = [&](DecisionRecord r, std::uint32_t svc, double id) {
        r.service = svc;
        r.identity_score = id;
        log.push_back(r);
        acc.add(r);
    };
    push(rec(0, 0, false, Action::allow), 0, 0.8);
    push(rec(1, 0, true, Action::step_up), 1, 0.8);
    push(rec(2, 0, true, Action::block), 1, 0.7);
    push(rec(3, 1, false, Action::block), 0, 0.8);
    push(rec(4, 0, false, Action::allow), 0, 0.6);
    push(rec(5, 1, true, Action::allow, false), 1, 0.8);

    const RunMetrics m = acc.finish();
    CHECK(m.events == 6);
    CHECK(m.incidents == 3);
    // Valid: t0 (a), t4 (a); totals a: 3, b: 3.
    CHECK(m.tii == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
    CHECK(m.sae == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.acf == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // Windows: user 0 from 0.8 to 0.6 over three points; user 1 truncated at one point.
    CHECK(m.ital == doctest::Approx((0.25 + 0.0) / 2.0).epsilon(1e-15));
    CHECK(m.per_scenario.at("credential_compromise") == ScenarioOutcome{1, 1, 1});
    CHECK(m.per_service_tii.at("a") == doctest::Approx(2.0 / 3.0));
    CHECK(m.per_service_tii.at("b") == 0.0);

    CHECK(oracle::compare(m, oracle::recompute(log, params.services, 3)).empty());
}

TEST_CASE("property: f1 is the harmonic mean of precision and recall") {
    Rng rng(77);
    for (int c = 0; c < 2000; ++c) {
        std::vector<DecisionRecord> log;
        const auto n = rng.below(40) + 1;
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto a = static_cast<Action>(rng.below(3));
            log.push_back(rec(i, 0, rng.bernoulli(0.3), a));
        }
        auto m = confusion_metrics(log);
        if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
            const double p = *m.precision, r = *m.recall;
            REQUIRE(std::abs(*m.f1 - 2.0 * p * r / (p + r)) <= 1e-12);
        }
    }
}

TEST_CASE("streaming metrics equal a brute-force pass over simulated logs") {
    RunConfig c;
    c.runs = 4;
    c.events_per_run = 3000;
    c.challenge.legit_pass_rate = 0.9;
    c.challenge.attacker_pass_rate = 0.2;
    for (std::uint32_t run = 0; run < c.runs; ++run) {
        for (const auto& r : run_once(c, run, true)) {
            CAPTURE(to_string(r.engine));
            const auto s = oracle::recompute(r.log, c.generator.service_zones, c.ital_window);
            const auto diff = oracle::compare(r.metrics, s);
            for (const auto& d : diff) FAIL_CHECK(d.quantity << ": " << d.streaming << " vs " << d.brute_force);
            CHECK(diff.empty());
            CHECK(r.metrics.tii >= 0.0);
            CHECK(r.metrics.tii <= 1.0);
            CHECK(r.metrics.sae <= 1.0);
            CHECK(r.metrics.acf <= 1.0);
        }
    }
}
