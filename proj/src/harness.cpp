#include "ztbench/harness.hpp"

#include "ztbench/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace ztbench {

std::string_view to_string(EngineKind e) {
    switch (e) {
        case EngineKind::baseline:   return "baseline";
        case EngineKind::securebank: return "securebank";
    }
    return "unknown";
}

EngineKind parse_engine(std::string_view s) {
    if (s == "baseline") return EngineKind::baseline;
    if (s == "securebank") return EngineKind::securebank;
    throw ConfigError("unknown engine '" + std::string(s) + "'");
}

// ── Configuration ────────────────────────────────────────────────────────────

void ChallengeModel::validate() const {
    for (double p : {legit_pass_rate, attacker_pass_rate})
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("challenge pass rates must lie in [0,1]");
}

bool ChallengeModel::passes(std::uint64_t stream_seed, std::uint64_t time_index, bool attack) const {
    const std::uint64_t bits = mix_seed(stream_seed ^ mix_seed(time_index));
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return u < (attack ? attacker_pass_rate : legit_pass_rate);
}

void RunConfig::validate() const {
    if (runs == 0) throw ConfigError("runs must be at least 1");
    if (events_per_run == 0) throw ConfigError("events_per_run must be at least 1");
    if (engines.empty()) throw ConfigError("at least one engine is required");
    if (std::set<EngineKind>(engines.begin(), engines.end()).size() != engines.size())
        throw ConfigError("engines must not repeat");
    if (ital_window < 2) throw ConfigError("ital_window must be at least 2");
    run_generator(0).validate();
    run_policy().validate();
    baseline_rules.validate();
    challenge.validate();
}

GeneratorConfig RunConfig::run_generator(std::uint32_t run_index) const {
    GeneratorConfig g = generator;
    g.n_events = events_per_run;
    g.base_seed = base_seed + run_index;
    g.amount_cap = policy.amount_cap;
    return g;
}

PolicyConfig RunConfig::run_policy() const {
    PolicyConfig p = policy;
    p.service_weights.clear();
    for (const auto& z : generator.service_zones) p.service_weights.push_back(z.weight);
    return p;
}

MetricsParams RunConfig::metrics_params(EngineKind engine) const {
    MetricsParams m;
    m.services = generator.service_zones;
    m.ital_window = ital_window;
    m.epsilon = policy.adaptation.epsilon;
    m.adaptive_segmentation = engine == EngineKind::securebank;
    return m;
}

// ── Runs ─────────────────────────────────────────────────────────────────────

std::vector<RunResult> run_stream(const RunConfig& config, const std::function<const Event*()>& next,
                                  std::uint64_t challenge_seed, std::uint32_t run_index, bool keep_log) {
    const PolicyConfig policy = config.run_policy();
    std::optional<BaselineEngine> baseline;
    std::optional<SecureBankEngine> securebank;
    std::vector<MetricsAccumulator> acc;
    std::vector<RunResult> out;
    for (EngineKind e : config.engines) {
        if (e == EngineKind::baseline) baseline.emplace(config.baseline_rules, policy.initial_trust);
        else securebank.emplace(policy);
        acc.emplace_back(config.metrics_params(e));
        out.push_back(RunResult{e, run_index, {}, {}});
    }

    while (const Event* e = next()) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            DecisionRecord r = out[k].engine == EngineKind::baseline ? baseline->decide(*e)
                                                                     : securebank->decide(*e).record;
            if (r.action == Action::step_up)
                r.challenge_passed = config.challenge.passes(challenge_seed, e->time_index, e->is_attack());
            acc[k].add(r);
            if (keep_log) out[k].log.push_back(std::move(r));
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k].metrics = acc[k].finish();
    return out;
}

std::vector<RunResult> run_events(const RunConfig& config, std::span<const Event> events,
                                  std::uint64_t challenge_seed, bool keep_log) {
    std::size_t i = 0;
    return run_stream(config, [&]() -> const Event* { return i < events.size() ? &events[i++] : nullptr; },
                      challenge_seed, 0, keep_log);
}

std::vector<RunResult> run_once(const RunConfig& config, std::uint32_t run_index, bool keep_log) {
    if (run_index >= config.runs) throw ConfigError("run_index outside [0, runs)");
    const GeneratorConfig g = config.run_generator(run_index);
    EventGenerator gen(g, g.base_seed);
    Event current;
    std::uint64_t produced = 0;
    auto next = [&]() -> const Event* {
        if (produced == g.n_events) return nullptr;
        ++produced;
        current = gen.next();
        return &current;
    };
    return run_stream(config, next, g.base_seed, run_index, keep_log);
}

RunResult run_once(const RunConfig& config, std::uint32_t run_index, EngineKind engine, bool keep_log) {
    RunConfig single = config;
    single.engines = {engine};
    return std::move(run_once(single, run_index, keep_log).front());
}

std::vector<Event> simulate_events(const RunConfig& config, std::uint32_t run_index) {
    const GeneratorConfig g = config.run_generator(run_index);
    EventGenerator gen(g, g.base_seed);
    std::vector<Event> events;
    events.reserve(g.n_events);
    for (std::uint64_t i = 0; i < g.n_events; ++i) events.push_back(gen.next());
    return events;
}

// ── Aggregation ──────────────────────────────────────────────────────────────

MetricSummary summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: no values");
    MetricSummary s;
    s.n = values.size();
    s.mean = stats::mean(values);
    s.sd = stats::sample_sd(values);
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

std::vector<double> EngineAggregate::values(const std::string& metric) const {
    std::vector<double> out;
    out.reserve(runs.size());
    for (const auto& r : runs) {
        auto sc = r.scalars();
        auto it = sc.find(metric);
        if (it == sc.end()) throw ConfigError("metric '" + metric + "' missing from a run");
        out.push_back(it->second);
    }
    return out;
}

const EngineAggregate& AggregateReport::at(EngineKind e) const {
    for (const auto& a : engines)
        if (a.engine == e) return a;
    throw ConfigError("report has no results for engine " + std::string(to_string(e)));
}

bool AggregateReport::has(EngineKind e) const {
    return std::any_of(engines.begin(), engines.end(), [&](const auto& a) { return a.engine == e; });
}

AggregateReport aggregate(std::vector<std::vector<RunResult>> per_run, std::uint32_t runs, bool keep_logs) {
    AggregateReport report;
    report.runs = runs;
    if (per_run.empty()) return report;
    for (std::size_t k = 0; k < per_run.front().size(); ++k) {
        EngineAggregate agg;
        agg.engine = per_run.front()[k].engine;
        for (auto& run : per_run) {
            agg.runs.push_back(run[k].metrics);
            if (keep_logs) agg.logs.push_back(std::move(run[k].log));
        }
        for (const auto& name : scalar_metric_names()) {
            std::vector<double> v;
            for (const auto& m : agg.runs) {
                auto sc = m.scalars();
                if (auto it = sc.find(name); it != sc.end()) v.push_back(it->second);
            }
            if (v.size() == agg.runs.size()) agg.summary[name] = summarize(v);
        }
        std::map<std::string, std::vector<double>> services;
        for (const auto& m : agg.runs) {
            for (const auto& [svc, value] : m.per_service_tii) services[svc].push_back(value);
            for (const auto& [kind, o] : m.per_scenario) {
                auto& total = agg.per_scenario[kind];
                total.allowed += o.allowed;
                total.challenged += o.challenged;
                total.blocked += o.blocked;
            }
        }
        for (const auto& [svc, v] : services) agg.per_service_tii[svc] = summarize(v);
        report.engines.push_back(std::move(agg));
    }
    return report;
}

AggregateReport monte_carlo(const RunConfig& config, const MonteCarloOptions& options) {
    config.validate();
    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, config.runs);

    std::vector<std::vector<RunResult>> results(config.runs);
    std::atomic<std::uint32_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::uint32_t i = cursor++; i < config.runs; i = cursor++) {
            try {
                results[i] = run_once(config, i, options.keep_logs);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return aggregate(std::move(results), config.runs, options.keep_logs);
}

// ── Statistical protocol ─────────────────────────────────────────────────────

const std::vector<std::string>& headline_metrics() {
    static const std::vector<std::string> names{"tii", "sae", "ital"};
    return names;
}

StatTestReport stat_tests(const AggregateReport& report, double family_alpha) {
    const auto& sb = report.at(EngineKind::securebank);
    const auto& base = report.at(EngineKind::baseline);
    std::vector<std::vector<double>> a, b;
    for (const auto& m : headline_metrics()) {
        a.push_back(sb.values(m));
        b.push_back(base.values(m));
    }
    StatTestReport out;
    out.family_alpha = family_alpha;
    out.bonferroni_threshold = family_alpha / static_cast<double>(headline_metrics().size());
    auto comparisons = stats::compare_family(a, b, family_alpha);
    for (std::size_t i = 0; i < comparisons.size(); ++i)
        out.metrics.push_back({headline_metrics()[i], std::move(comparisons[i])});
    return out;
}

// ── Sensitivity ──────────────────────────────────────────────────────────────

const std::vector<std::string>& sensitivity_parameters() {
    static const std::vector<std::string> names{
        "eta_identity",  "eta_device",         "eta_context",     "theta_block",
        "theta_stepup",  "attack_probability", "acf_autonomy_floor", "amount_cap",
        "initial_trust", "legit_pass_rate",    "attacker_pass_rate"};
    return names;
}

void apply_parameter(RunConfig& c, const std::string& name, double v) {
    if (name == "eta_identity") c.policy.adaptation.eta_identity = v;
    else if (name == "eta_device") c.policy.adaptation.eta_device = v;
    else if (name == "eta_context") c.policy.adaptation.eta_context = v;
    else if (name == "theta_block") c.policy.theta_block = v;
    else if (name == "theta_stepup") c.policy.theta_stepup = v;
    else if (name == "attack_probability") c.generator.attack_probability = v;
    else if (name == "acf_autonomy_floor") c.policy.acf_autonomy_floor = v;
    else if (name == "amount_cap") c.policy.amount_cap = v;
    else if (name == "initial_trust") c.policy.initial_trust = v;
    else if (name == "legit_pass_rate") c.challenge.legit_pass_rate = v;
    else if (name == "attacker_pass_rate") c.challenge.attacker_pass_rate = v;
    else throw ConfigError("unknown sensitivity parameter '" + name + "'");
}

ParameterGrid default_sensitivity_grid() {
    return {{"eta_identity", {0.05, 0.15, 0.30}},
            {"theta_stepup", {0.5, 0.6, 0.7}},
            {"attack_probability", {0.02, 0.05, 0.10}}};
}

SensitivityReport sensitivity_ofat(const RunConfig& base, const ParameterGrid& grid,
                                   const MonteCarloOptions& options) {
    if (grid.empty()) throw ConfigError("sensitivity grid is empty");
    for (const auto& [name, values] : grid) {
        if (values.empty()) throw ConfigError("sensitivity grid for '" + name + "' has no values");
        RunConfig probe = base;
        for (double v : values) {
            apply_parameter(probe, name, v);
            probe.validate();
        }
    }

    SensitivityReport report;
    for (const auto& [name, values] : grid) {
        ParameterSensitivity ps;
        ps.parameter = name;
        for (double v : values) {
            RunConfig cfg = base;
            apply_parameter(cfg, name, v);
            AggregateReport agg = monte_carlo(cfg, {options.threads, false});
            SensitivityPoint pt;
            pt.value = v;
            for (const auto& e : agg.engines)
                for (const auto& m : headline_metrics())
                    pt.means[std::string(to_string(e.engine))][m] = e.summary.at(m).mean;
            ps.points.push_back(std::move(pt));
        }
        for (const auto& [engine, metrics] : ps.points.front().means) {
            for (const auto& [metric, unused] : metrics) {
                std::vector<double> v;
                for (const auto& pt : ps.points) v.push_back(pt.means.at(engine).at(metric));
                std::optional<double> cv;
                if (stats::mean(v) != 0.0) cv = stats::coeff_variation(v);
                ps.cv[engine][metric] = cv;
            }
        }
        report.parameters.push_back(std::move(ps));
    }
    return report;
}

// ── Empirical comparison ─────────────────────────────────────────────────────

EmpiricalComparison compare_empirical(const EngineMetrics& sim, const EngineMetrics& empirical) {
    if (sim.size() != empirical.size() ||
        !std::equal(sim.begin(), sim.end(), empirical.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first; }))
        throw ConfigError("simulated and empirical results must cover the same engines");

    EmpiricalComparison out;
    std::vector<double> xs, ys;
    for (const auto& [engine, sm] : sim) {
        const auto s_scalars = sm.scalars();
        const auto e_scalars = empirical.at(engine).scalars();
        for (const auto& m : headline_metrics()) {
            ComparisonRow row;
            row.engine = std::string(to_string(engine));
            row.metric = m;
            row.simulated = s_scalars.at(m);
            row.empirical = e_scalars.at(m);
            row.abs_error = row.empirical - row.simulated;
            if (row.simulated != 0.0) row.rel_error = row.abs_error / row.simulated;
            xs.push_back(row.simulated);
            ys.push_back(row.empirical);
            out.rows.push_back(std::move(row));
        }
    }
    if (xs.size() < 2) throw ConfigError("correlation undefined");
    out.pearson_r = stats::pearson_r(xs, ys);
    return out;
}

EmpiricalComparison compare_empirical(const AggregateReport& sim, const EngineMetrics& empirical) {
    EngineMetrics means;
    for (const auto& e : sim.engines) {
        RunMetrics m;
        m.tii = e.summary.at("tii").mean;
        m.sae = e.summary.at("sae").mean;
        m.ital = e.summary.at("ital").mean;
        means[e.engine] = m;
    }
    return compare_empirical(means, empirical);
}

} // namespace ztbench
