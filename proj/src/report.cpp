#include "ztbench/report.hpp"

#include "ztbench/config.hpp"
#include "ztbench/errors.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace ztbench {

using nlohmann::json;

namespace {

void emit(std::string& out, const json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, value] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += inner + json(key).dump() + ": ";
                emit(out, value, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                emit(out, v[i], indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float: {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_number(d) : "null";
            return;
        }
        default:
            out += v.dump();
    }
}

std::string csv_number(double v) { return format_number(v); }

std::string optional_json_key(const std::optional<bool>& b) { return b ? (*b ? "1" : "0") : ""; }

json summary_json(const MetricSummary& s) {
    return {{"mean", s.mean}, {"std", s.sd}, {"min", s.min}, {"max", s.max}};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json test_json(const stats::TestResult& t) {
    return {{"test", std::string(stats::to_string(t.kind))},
            {"statistic", t.statistic},
            {"p_value", t.p_value},
            {"df", optional_number(t.df)},
            {"effect_size", optional_number(t.effect_size)},
            {"significant_after_correction", t.significant_after_correction}};
}

json shapiro_json(const std::optional<stats::TestResult>& t) {
    if (!t) return nullptr;
    return {{"w", t->statistic}, {"p_value", t->p_value}};
}

std::string metric_label(const std::string& m) {
    if (m == "sae_star") return "SAE*";
    if (m == "precision") return "Precision";
    if (m == "recall") return "Recall";
    std::string out = m;
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    std::string s(buf, end);
    if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(v))));
    const int decimals = std::max(0, 5 - magnitude);
    char buf[512];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

std::string dump_json(const json& doc) {
    std::string out;
    emit(out, doc, 0);
    out += "\n";
    return out;
}

void write_json(std::ostream& out, const json& doc) { out << dump_json(doc); }

json run_metrics_json(const RunMetrics& m) {
    json scalars = json::object();
    for (const auto& [name, value] : m.scalars()) scalars[name] = value;
    json services = json::object();
    for (const auto& [svc, value] : m.per_service_tii) services[svc] = value;
    json scenarios = json::object();
    for (const auto& [kind, o] : m.per_scenario)
        scenarios[kind] = {{"allowed", o.allowed}, {"challenged", o.challenged}, {"blocked", o.blocked}};
    return {{"metrics", scalars},
            {"per_service_tii", services},
            {"per_scenario", scenarios},
            {"events", m.events},
            {"incidents", m.incidents}};
}

json aggregate_json(const AggregateReport& report) {
    json engines = json::array();
    for (const auto& e : report.engines) {
        json metrics = json::object();
        for (const auto& [name, s] : e.summary) metrics[name] = summary_json(s);
        json services = json::object();
        for (const auto& [svc, s] : e.per_service_tii) services[svc] = summary_json(s);
        json scenarios = json::object();
        for (const auto& [kind, o] : e.per_scenario)
            scenarios[kind] = {{"allowed", o.allowed}, {"challenged", o.challenged}, {"blocked", o.blocked}};
        json runs = json::array();
        for (std::size_t i = 0; i < e.runs.size(); ++i) {
            json r = run_metrics_json(e.runs[i]);
            r["run_index"] = i;
            runs.push_back(std::move(r));
        }
        engines.push_back({{"engine", std::string(to_string(e.engine))},
                           {"metrics", metrics},
                           {"per_service_tii", services},
                           {"per_scenario", scenarios},
                           {"runs", runs}});
    }
    return {{"schema_version", kSchemaVersion}, {"runs", report.runs}, {"engines", engines}};
}

std::string aggregate_csv(const AggregateReport& report) {
    std::string out = "engine,metric,mean,std,min,max\n";
    for (const auto& e : report.engines) {
        for (const auto& name : scalar_metric_names()) {
            auto it = e.summary.find(name);
            if (it == e.summary.end()) continue;
            const auto& s = it->second;
            out += std::string(to_string(e.engine)) + "," + name + "," + csv_number(s.mean) + "," + csv_number(s.sd) +
                   "," + csv_number(s.min) + "," + csv_number(s.max) + "\n";
        }
    }
    return out;
}

json stat_tests_json(const StatTestReport& report) {
    json metrics = json::array();
    for (const auto& mc : report.metrics) {
        const auto& c = mc.comparison;
        metrics.push_back({{"metric", mc.metric},
                           {"shapiro_securebank", shapiro_json(c.shapiro_a)},
                           {"shapiro_baseline", shapiro_json(c.shapiro_b)},
                           {"both_normal", c.both_normal},
                           {"test", test_json(c.test)},
                           {"cohens_d", optional_number(c.cohens_d)},
                           {"rank_biserial", c.rank_biserial}});
    }
    return {{"schema_version", kSchemaVersion},
            {"family_alpha", report.family_alpha},
            {"bonferroni_threshold", report.bonferroni_threshold},
            {"normality_alpha", 0.05},
            {"comparisons", metrics}};
}

json sensitivity_json(const SensitivityReport& report) {
    json params = json::array();
    for (const auto& p : report.parameters) {
        json points = json::array();
        for (const auto& pt : p.points) points.push_back({{"value", pt.value}, {"means", pt.means}});
        json cv = json::object();
        for (const auto& [engine, metrics] : p.cv)
            for (const auto& [metric, value] : metrics) cv[engine][metric] = optional_number(value);
        params.push_back({{"parameter", p.parameter}, {"points", points}, {"cv", cv}});
    }
    return {{"schema_version", kSchemaVersion}, {"parameters", params}};
}

std::string sensitivity_csv(const SensitivityReport& report) {
    std::string out = "parameter,value,engine,metric,mean\n";
    for (const auto& p : report.parameters)
        for (const auto& pt : p.points)
            for (const auto& [engine, metrics] : pt.means)
                for (const auto& [metric, mean] : metrics)
                    out += p.parameter + "," + csv_number(pt.value) + "," + engine + "," + metric + "," +
                           csv_number(mean) + "\n";
    return out;
}

json comparison_json(const EmpiricalComparison& c) {
    json rows = json::array();
    for (const auto& r : c.rows)
        rows.push_back({{"engine", r.engine},
                        {"metric", r.metric},
                        {"simulated", r.simulated},
                        {"empirical", r.empirical},
                        {"abs_error", r.abs_error},
                        {"rel_error", optional_number(r.rel_error)}});
    return {{"pearson_r", c.pearson_r}, {"rows", rows}};
}

json dataset_summary_json(const DatasetSummary& s) {
    return {{"rows", s.rows},
            {"fraud_rows", s.fraud_rows},
            {"fraud_rate", s.fraud_rate},
            {"amount_mean", s.amount_mean},
            {"amount_median", s.amount_median},
            {"amount_sd", s.amount_sd},
            {"users", s.users},
            {"devices", s.devices},
            {"compromised_devices", s.compromised_devices},
            {"scenario_counts", s.scenario_counts}};
}

std::string decision_log_csv(std::span<const DecisionRecord> log) {
    std::string out =
        "time_index,user,device,service,scenario,amount,normalized_risk,action,theta,fts,band,automated,"
        "confirmed_correct,challenge_passed,identity_score\n";
    for (const auto& r : log) {
        out += std::to_string(r.time_index) + "," + std::to_string(r.user.index) + "," +
               std::to_string(r.device.index) + "," + std::to_string(r.service) + "," +
               (r.scenario ? std::string(to_string(*r.scenario)) : "") + "," + csv_number(r.amount) + "," +
               csv_number(r.normalized_risk) + "," + std::string(to_string(r.action)) + "," + csv_number(r.theta) +
               "," + csv_number(r.fts) + "," + std::to_string(r.band) + "," + (r.automated ? "1" : "0") + "," +
               optional_json_key(r.confirmed_correct) + "," + optional_json_key(r.challenge_passed) + "," +
               csv_number(r.identity_score) + "\n";
    }
    return out;
}

json manifest_json(std::string_view command, const RunConfig& config, json extra) {
    json seeds = json::array();
    for (std::uint32_t i = 0; i < config.runs; ++i) seeds.push_back(config.base_seed + i);
    json m{{"schema_version", kSchemaVersion},
           {"tool", std::string(kToolName)},
           {"version", std::string(kToolVersion)},
           {"command", std::string(command)},
           {"config", to_json(config)},
           {"seeds", seeds}};
    if (extra.is_object())
        for (const auto& [k, v] : extra.items()) m[k] = v;
    return m;
}

EngineMetrics engine_means_from_aggregate(const json& aggregate) {
    EngineMetrics out;
    try {
        for (const auto& e : aggregate.at("engines")) {
            RunMetrics m;
            const auto& metrics = e.at("metrics");
            m.tii = metrics.at("tii").at("mean").get<double>();
            m.sae = metrics.at("sae").at("mean").get<double>();
            m.ital = metrics.at("ital").at("mean").get<double>();
            out[parse_engine(e.at("engine").get<std::string>())] = m;
        }
    } catch (const json::exception& ex) {
        throw DataError(std::string("malformed aggregate document: ") + ex.what());
    }
    return out;
}

std::optional<double> relative_delta(double baseline, double securebank) {
    if (baseline == 0.0) return std::nullopt;
    return (securebank - baseline) / baseline * 100.0;
}

std::string render_report(const json& aggregate) {
    struct Stat {
        double mean, sd;
    };
    std::map<std::string, std::map<std::string, Stat>> by_engine;
    try {
        for (const auto& e : aggregate.at("engines")) {
            auto& metrics = by_engine[e.at("engine").get<std::string>()];
            for (const auto& [name, s] : e.at("metrics").items())
                metrics[name] = {s.at("mean").get<double>(), s.at("std").get<double>()};
        }
    } catch (const json::exception& ex) {
        throw DataError(std::string("malformed aggregate document: ") + ex.what());
    }
    if (!by_engine.contains("baseline") || !by_engine.contains("securebank"))
        throw DataError("aggregate must contain baseline and securebank results");
    const auto& base = by_engine["baseline"];
    const auto& sb = by_engine["securebank"];

    std::vector<std::array<std::string, 5>> rows{{"Metric", "Baseline", "SecureBank", "Absolute Δ", "Relative Δ"}};
    for (const auto& name : scalar_metric_names()) {
        auto b = base.find(name);
        auto s = sb.find(name);
        if (b == base.end() || s == sb.end()) continue;
        auto rel = relative_delta(b->second.mean, s->second.mean);
        std::string abs = fixed(s->second.mean - b->second.mean, 4);
        if (!abs.starts_with("-")) abs.insert(0, "+");
        std::string relative = "n/a";
        if (rel) {
            relative = fixed(*rel, 2) + "%";
            if (!relative.starts_with("-")) relative.insert(0, "+");
        }
        rows.push_back({metric_label(name), fixed(b->second.mean, 4) + " ± " + fixed(b->second.sd, 4),
                        fixed(s->second.mean, 4) + " ± " + fixed(s->second.sd, 4), abs, relative});
    }

    std::array<std::size_t, 5> width{};
    for (const auto& r : rows)
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], display_width(r[c]));
    std::ostringstream out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < 5; ++c) {
            const auto& cell = rows[i][c];
            const std::string fill(width[c] - display_width(cell), ' ');
            // Metric names left-aligned, numbers right-aligned.
            out << (c == 0 ? cell + fill : fill + cell) << (c + 1 < 5 ? "  " : "");
        }
        out << '\n';
        if (i == 0) {
            std::size_t total = 8;
            for (auto w : width) total += w;
            out << std::string(total, '-') << '\n';
        }
    }
    return out.str();
}

} // namespace ztbench
