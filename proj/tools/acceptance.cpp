// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only if all pass.

#include "oracle.hpp"

#include "ztbench/dataset.hpp"
#include "ztbench/fixture_check.hpp"
#include "ztbench/harness.hpp"
#include "ztbench/policy.hpp"
#include "ztbench/report.hpp"
#include "ztbench/stats.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace ztbench;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v) { return format_number(v); }

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared by criteria 1 and 2.
struct DefaultRun {
    RunConfig config;
    AggregateReport report;
    double seconds = 0.0;
};

const DefaultRun& default_run() {
    static const DefaultRun run = [] {
        DefaultRun r;
        const auto t0 = Clock::now();
        r.report = monte_carlo(r.config, {0, true});
        r.seconds = seconds_since(t0);
        return r;
    }();
    return run;
}

Outcome directional_reproduction() {
    Outcome o;
    const auto& run = default_run();
    const auto& base = run.report.at(EngineKind::baseline).summary;
    const auto& sb = run.report.at(EngineKind::securebank).summary;
    const double sae_b = base.at("sae").mean, sae_s = sb.at("sae").mean;
    const double ital_b = base.at("ital").mean, ital_s = sb.at("ital").mean;
    const double tii_b = base.at("tii").mean, tii_s = sb.at("tii").mean;
    o.require(sae_s >= 10.0 * sae_b, "SAE_sb >= 10 x SAE_base");
    o.require(ital_s >= 5.0 * ital_b, "ITAL_sb >= 5 x ITAL_base");
    o.require(tii_s < tii_b, "TII_sb < TII_base");
    o.note("SAE " + fmt(sae_b) + " -> " + fmt(sae_s) + ", ITAL " + fmt(ital_b) + " -> " + fmt(ital_s) + ", TII " +
           fmt(tii_b) + " -> " + fmt(tii_s));

    const auto tests = stat_tests(run.report);
    o.require(std::abs(tests.bonferroni_threshold - 0.05 / 3.0) < 1e-15, "Bonferroni threshold alpha/3");
    for (const auto& m : tests.metrics) {
        const auto& t = m.comparison.test;
        o.require(t.p_value < 0.001, m.metric + " p < 0.001");
        o.require(t.significant_after_correction, m.metric + " significant after correction");
        if (m.metric != "tii") {
            const bool big = m.comparison.cohens_d && std::abs(*m.comparison.cohens_d) > 2.0;
            o.require(big, m.metric + " |d| > 2");
        }
        o.note(m.metric + ": " + std::string(stats::to_string(t.kind)) + " p=" + fmt(t.p_value) +
               (m.comparison.cohens_d ? " d=" + fmt(*m.comparison.cohens_d) : ""));
    }
    o.require(run.seconds <= 300.0, "runtime <= 5 min");
    o.note(fmt(run.seconds) + " s");
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    const auto& run = default_run();
    std::size_t checked = 0;
    for (const auto& e : run.report.engines) {
        if (e.logs.size() != e.runs.size()) {
            o.require(false, "decision logs retained for every run");
            continue;
        }
        for (std::size_t i = 0; i < e.runs.size(); ++i) {
            const auto s = oracle::recompute(e.logs[i], run.config.generator.service_zones, run.config.ital_window);
            for (const auto& m : oracle::compare(e.runs[i], s))
                o.require(false, std::string(to_string(e.engine)) + " run " + std::to_string(i) + " " + m.quantity);
            ++checked;
        }
    }
    o.note(std::to_string(checked) + " engine-runs recomputed from raw logs");
    return o;
}

Outcome fixture_suite() {
    Outcome o;
    std::ifstream in(ZTBENCH_DEFAULT_FIXTURES);
    if (!in) {
        o.require(false, "fixture file readable");
        return o;
    }
    const auto doc = nlohmann::json::parse(in);
    const auto checks = check_stats_fixtures(doc);
    std::size_t failed = 0;
    for (const auto& c : checks)
        if (!c.pass) {
            ++failed;
            o.require(false, c.case_name + "/" + c.quantity);
        }
    const std::size_t cases = doc.at("cases").size();
    for (const char* test : {"shapiro_a", "shapiro_b", "welch", "mann_whitney", "cohens_d", "pearson_r"}) {
        std::size_t n = 0;
        for (const auto& c : doc.at("cases")) n += c.contains(test);
        o.require(n >= 10, std::string(">= 10 sample pairs for ") + test);
    }
    const std::vector<double> p{0.5, 0.5, 0.5};
    const double threshold = stats::bonferroni(p, 0.05).threshold;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", threshold);
    o.require(std::string(buf) == "0.016667", "Bonferroni threshold 0.016667");
    o.note(std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) + " checks over " +
           std::to_string(cases) + " cases; threshold " + buf);
    return o;
}

Outcome determinism() {
    Outcome o;
    const RunConfig c;
    const unsigned cores = std::max(2u, std::thread::hardware_concurrency());
    const auto a = monte_carlo(c, {cores, false});
    const auto b = monte_carlo(c, {cores, false});
    const auto serial = monte_carlo(c, {1, false});
    o.require(aggregate_csv(a) == aggregate_csv(b), "repeat aggregate.csv identical");
    auto bundle = [](const AggregateReport& r) {
        return dump_json(aggregate_json(r)) + aggregate_csv(r) + dump_json(stat_tests_json(stat_tests(r)));
    };
    o.require(bundle(a) == bundle(serial), "parallel bundle equals serial bundle");
    o.note("30 x 5000, seed 42, " + std::to_string(cores) + " threads vs 1");
    return o;
}

Outcome dataset_calibration() {
    Outcome o;
    const auto records = generate_dataset(10000, 7);
    const auto s = summarize_dataset(records);
    o.require(s.fraud_rows == 350, "350 fraud rows");
    const DatasetProfile profile;
    for (std::size_t k = 0; k < kScenarioCount; ++k) {
        const auto name = std::string(to_string(static_cast<ScenarioKind>(k)));
        const double target = profile.scenario_shares[k] / 100.0 * 350.0;
        const auto it = s.scenario_counts.find(name);
        const double got = it == s.scenario_counts.end() ? 0.0 : static_cast<double>(it->second);
        o.require(std::abs(got - target) <= 1.0, name + " within +/-1 of " + fmt(target));
    }
    o.require(std::abs(s.amount_mean - 352.07) <= 0.1 * 352.07, "mean within 10%");
    o.require(std::abs(s.amount_median - 94.22) <= 0.1 * 94.22, "median within 10%");
    o.note("fraud " + std::to_string(s.fraud_rows) + ", mean " + fmt(s.amount_mean) + ", median " +
           fmt(s.amount_median));
    return o;
}

Outcome empirical_closure() {
    Outcome o;
    const auto records = generate_dataset(10000, 7);
    std::ostringstream csv;
    write_csv(csv, records);
    std::istringstream in(csv.str());
    const auto parsed = read_csv(in);
    const DatasetProfile profile;
    const auto ingest = ingest_dataset(parsed, profile);

    RunConfig c;
    c.runs = 1;
    c.events_per_run = ingest.events.size();
    c.generator.service_zones = profile.services;
    c.generator.zone_traffic = profile.service_traffic;
    const auto results = run_events(c, ingest.events, 7);

    EngineMetrics emp;
    for (const auto& r : results) emp[r.engine] = r.metrics;
    const auto& b = emp.at(EngineKind::baseline);
    const auto& s = emp.at(EngineKind::securebank);
    o.require(s.sae > b.sae, "SAE_sb > SAE_base");
    o.require(s.ital > b.ital, "ITAL_sb > ITAL_base");
    o.require(s.tii < b.tii, "TII_sb < TII_base");
    const double self_r = compare_empirical(emp, emp).pearson_r;
    o.require(self_r == 1.0, "self comparison r == 1.0");
    const double sim_r = compare_empirical(default_run().report, emp).pearson_r;
    o.require(std::isfinite(sim_r) && std::abs(sim_r) <= 1.0, "simulated vs empirical r in [-1,1]");
    o.note("SAE " + fmt(b.sae) + " -> " + fmt(s.sae) + ", ITAL " + fmt(b.ital) + " -> " + fmt(s.ital) + ", TII " +
           fmt(b.tii) + " -> " + fmt(s.tii) + "; r(self)=" + fmt(self_r) + ", r(sim)=" + fmt(sim_r));
    return o;
}

Outcome latency() {
    Outcome o;
    RunConfig c;
    c.runs = 1;
    c.events_per_run = 200000;
    const auto events = simulate_events(c, 0);
    SecureBankEngine engine(c.run_policy());
    std::size_t blocks = 0;
    const auto t0 = Clock::now();
    for (const auto& e : events) blocks += engine.decide(e).record.action == Action::block;
    const double secs = seconds_since(t0);
    const double mean_ms = secs * 1000.0 / static_cast<double>(events.size());
    o.require(events.size() >= 100000, ">= 100k decisions");
    o.require(mean_ms < 1.0, "mean latency < 1 ms");
    o.note(std::to_string(events.size()) + " decisions, mean " + fmt(mean_ms) + " ms (" + std::to_string(blocks) +
           " blocks)");
    return o;
}

Outcome trust_properties() {
    Outcome o;
    Rng rng(2024);
    const int n = 20000;
    std::size_t range_fail = 0, conv_fail = 0, theta_fail = 0, action_fail = 0;

    for (int i = 0; i < n; ++i) {
        const double u = update_trust(rng.uniform(), rng.uniform(), 1.0 - rng.uniform());
        const auto w = TrustWeights::normalized(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform() + 1e-3);
        const double t = composite_trust(w, rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
        if (u < 0.0 || u > 1.0 || t < 0.0 || t > 1.0) ++range_fail;
    }

    for (int i = 0; i < n; ++i) {
        const double eta = rng.uniform(0.01, 1.0);
        const double anomaly = rng.bernoulli(0.5) ? 0.0 : 1.0;
        const double limit = 1.0 - anomaly;
        double x = rng.uniform();
        for (int step = 0; step < 10; ++step) {
            const double next = update_trust(x, anomaly, eta);
            const bool monotone = anomaly == 0.0 ? next >= x : next <= x;
            if (!monotone || std::abs(std::abs(next - limit) - (1.0 - eta) * std::abs(x - limit)) > 1e-12)
                ++conv_fail;
            x = next;
        }
    }

    for (int i = 0; i < n; ++i) {
        const auto w = TrustWeights::normalized(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform() + 1e-3);
        double v[4] = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        const double before = composite_trust(w, v[0], v[1], v[2], v[3]);
        const auto k = rng.below(4);
        v[k] += (1.0 - v[k]) * rng.uniform();
        const double after = composite_trust(w, v[0], v[1], v[2], v[3]);
        if (k == 2 ? after > before + 1e-15 : after < before - 1e-15) ++theta_fail;
    }

    PolicyConfig policy;
    policy.service_weights = {1.0, 1.8, 1.4, 0.8, 2.0};
    for (int i = 0; i < n; ++i) {
        Event e;
        e.user = user_id(1);
        e.device = device_id(1);
        e.context = context_id(1);
        e.transaction.amount = rng.uniform(0.0, 2000.0);
        e.transaction.service = service_id(static_cast<std::uint32_t>(rng.below(5)));
        e.transaction.normalized_risk = rng.uniform();
        e.anomaly = {rng.uniform(), rng.uniform(), rng.uniform()};
        TrustState base(0.8);
        base.set(e.user, rng.uniform());
        base.set(e.device, rng.uniform());
        base.set(e.context, rng.uniform());
        TrustState worse = base;
        Event riskier = e;
        switch (rng.below(4)) {
            case 0: worse.set(e.user, base.get(e.user) * rng.uniform()); break;
            case 1: worse.set(e.device, base.get(e.device) * rng.uniform()); break;
            case 2: worse.set(e.context, base.get(e.context) * rng.uniform()); break;
            default: riskier.transaction.normalized_risk += (1.0 - e.transaction.normalized_risk) * rng.uniform();
        }
        AutomationLedger l1, l2;
        const auto a = securebank_decide(e, base, policy, l1).record.action;
        const auto b = securebank_decide(riskier, worse, policy, l2).record.action;
        if (static_cast<int>(b) < static_cast<int>(a)) ++action_fail;
    }

    o.require(range_fail == 0, "range preservation");
    o.require(conv_fail == 0, "geometric convergence at 1 - eta");
    o.require(theta_fail == 0, "theta monotonicity");
    o.require(action_fail == 0, "PDP action monotonicity");
    o.note(std::to_string(n) + " randomized cases per property");
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"directional reproduction", directional_reproduction},
        {"metric oracle equivalence", oracle_equivalence},
        {"statistics fixture suite", fixture_suite},
        {"determinism", determinism},
        {"dataset calibration", dataset_calibration},
        {"empirical pipeline closure", empirical_closure},
        {"performance envelope", latency},
        {"trust-dynamics properties", trust_properties},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
