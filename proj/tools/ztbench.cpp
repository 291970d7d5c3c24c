// ztbench command-line entry point.
//
// Exit codes: 0 success, 1 check failure (stats-check), 2 usage, config or
// input-data error, 3 filesystem error.

#include "ztbench/config.hpp"
#include "ztbench/dataset.hpp"
#include "ztbench/errors.hpp"
#include "ztbench/fixture_check.hpp"
#include "ztbench/harness.hpp"
#include "ztbench/report.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ztbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

unsigned thread_cap() {
    const char* env = std::getenv("ZTBENCH_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("ZTBENCH_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Options shared by the run-based subcommands.
struct RunFlags {
    std::string config_path;
    std::optional<std::uint32_t> runs;
    std::optional<std::uint64_t> events;
    std::optional<std::uint64_t> seed;

    void add_to(CLI::App* app, bool with_runs = true) {
        app->add_option("--config", config_path, "JSON configuration file");
        if (with_runs) app->add_option("--runs", runs, "Monte Carlo runs per engine");
        app->add_option("--events", events, "Events per run");
        app->add_option("--seed", seed, "Base seed; run i uses seed + i");
    }

    RunConfig resolve() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (runs) c.runs = *runs;
        if (events) c.events_per_run = *events;
        if (seed) c.base_seed = *seed;
        c.validate();
        return c;
    }
};

void print_summary(const AggregateReport& report) {
    for (const auto& e : report.engines) {
        std::cout << to_string(e.engine) << ':';
        for (const auto& m : headline_metrics()) {
            const auto& s = e.summary.at(m);
            std::cout << ' ' << m << '=' << format_number(s.mean) << " (sd " << format_number(s.sd) << ')';
        }
        std::cout << '\n';
    }
}

// ── Subcommands ──────────────────────────────────────────────────────────────

int cmd_simulate(const RunFlags& flags, std::uint32_t run_index, const std::string& out_dir, bool write_logs) {
    RunConfig c = flags.resolve();
    c.runs = std::max(c.runs, run_index + 1);
    auto results = run_once(c, run_index, write_logs);
    json engines = json::object();
    for (const auto& r : results) engines[std::string(to_string(r.engine))] = run_metrics_json(r.metrics);
    const json doc{{"schema_version", kSchemaVersion}, {"run_index", run_index}, {"seed", c.base_seed + run_index},
                   {"engines", engines}};
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_file(fs::path(out_dir) / "run_metrics.json", dump_json(doc));
        RunConfig single = c;
        single.runs = 1;
        single.base_seed = c.base_seed + run_index;
        write_file(fs::path(out_dir) / "manifest.json", dump_json(manifest_json("simulate", single)));
        if (write_logs)
            for (const auto& r : results)
                write_file(fs::path(out_dir) / ("decisions_" + std::string(to_string(r.engine)) + ".csv"),
                           decision_log_csv(r.log));
    }
    std::cout << dump_json(doc);
    return kExitOk;
}

int cmd_monte_carlo(const RunFlags& flags, const std::string& out_dir, bool write_logs) {
    RunConfig c = flags.resolve();
    AggregateReport report = monte_carlo(c, {thread_cap(), write_logs});
    ensure_dir(out_dir);
    const fs::path dir(out_dir);
    write_file(dir / "aggregate.json", dump_json(aggregate_json(report)));
    write_file(dir / "aggregate.csv", aggregate_csv(report));
    if (report.has(EngineKind::baseline) && report.has(EngineKind::securebank))
        write_file(dir / "stat_tests.json", dump_json(stat_tests_json(stat_tests(report))));
    write_file(dir / "manifest.json", dump_json(manifest_json("monte-carlo", c)));
    if (write_logs) {
        const fs::path logs = dir / "logs";
        ensure_dir(logs);
        for (const auto& e : report.engines)
            for (std::size_t i = 0; i < e.logs.size(); ++i)
                write_file(logs / (std::string(to_string(e.engine)) + "_run" + std::to_string(i) + ".csv"),
                           decision_log_csv(e.logs[i]));
    }
    print_summary(report);
    std::cout << "wrote " << out_dir << '\n';
    return kExitOk;
}

ParameterGrid parse_grid(const std::vector<std::string>& params, const std::string& grid_file) {
    ParameterGrid grid;
    if (!grid_file.empty()) {
        const json doc = read_json_file(grid_file);
        if (!doc.is_object()) throw ConfigError("grid file must hold an object of parameter -> values");
        for (const auto& [name, values] : doc.items()) {
            if (!values.is_array()) throw ConfigError("grid values for '" + name + "' must be an array");
            std::vector<double> v;
            for (const auto& x : values) {
                if (!x.is_number()) throw ConfigError("grid values for '" + name + "' must be numbers");
                v.push_back(x.get<double>());
            }
            grid.emplace_back(name, std::move(v));
        }
        if (grid.empty()) throw ConfigError("sensitivity grid is empty");
    }
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects name=v1,v2,...");
        std::vector<double> values;
        std::stringstream ss(p.substr(eq + 1));
        for (std::string item; std::getline(ss, item, ',');) {
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                values.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("invalid value '" + item + "' for " + p.substr(0, eq));
            }
        }
        grid.emplace_back(p.substr(0, eq), std::move(values));
    }
    if (grid_file.empty() && params.empty()) grid = default_sensitivity_grid();
    return grid;
}

int cmd_sensitivity(const RunFlags& flags, const std::vector<std::string>& params, const std::string& grid_file,
                    const std::string& out_dir) {
    RunConfig c = flags.resolve();
    const ParameterGrid grid = parse_grid(params, grid_file);
    SensitivityReport report = sensitivity_ofat(c, grid, {thread_cap(), false});
    ensure_dir(out_dir);
    const fs::path dir(out_dir);
    write_file(dir / "sensitivity.json", dump_json(sensitivity_json(report)));
    write_file(dir / "sensitivity.csv", sensitivity_csv(report));
    json g = json::object();
    for (const auto& [name, values] : grid) g[name] = values;
    write_file(dir / "manifest.json", dump_json(manifest_json("sensitivity", c, {{"grid", g}})));
    for (const auto& p : report.parameters) {
        std::cout << p.parameter << ':';
        for (const auto& [engine, metrics] : p.cv)
            for (const auto& [metric, cv] : metrics)
                std::cout << ' ' << engine << '.' << metric << ".cv=" << (cv ? format_number(*cv) : "n/a");
        std::cout << '\n';
    }
    return kExitOk;
}

int cmd_gen_dataset(std::size_t n, std::uint64_t seed, const std::string& out) {
    const auto records = generate_dataset(n, seed);
    std::ostringstream csv;
    write_csv(csv, records);
    if (const auto parent = fs::path(out).parent_path(); !parent.empty()) ensure_dir(parent);
    write_file(out, csv.str());
    const auto s = summarize_dataset(records);
    std::cout << "rows " << s.rows << "\nfraud rows " << s.fraud_rows << "\nfraud rate "
              << format_number(s.fraud_rate) << "\namount mean " << format_number(s.amount_mean)
              << "\namount median " << format_number(s.amount_median) << "\namount sd "
              << format_number(s.amount_sd) << "\nusers " << s.users << "\ndevices " << s.devices
              << "\ncompromised devices " << s.compromised_devices << '\n';
    for (const auto& [kind, count] : s.scenario_counts) std::cout << "  " << kind << ' ' << count << '\n';
    return kExitOk;
}

int cmd_empirical(const RunFlags& flags, const std::string& dataset, const std::string& sim_aggregate,
                  const std::string& out_dir) {
    RunConfig sim = flags.resolve();
    const std::string bytes = read_file(dataset);
    std::istringstream in(bytes);
    const auto records = read_csv(in);
    const DatasetProfile profile;
    const IngestResult ingest = ingest_dataset(records, profile);
    for (const auto& w : ingest.warnings) std::cerr << "warning: " << w << '\n';

    RunConfig emp = sim;
    emp.runs = 1;
    emp.events_per_run = ingest.events.size();
    emp.generator.service_zones = profile.services;
    emp.generator.zone_traffic = profile.service_traffic;
    emp.validate();
    const auto results = run_events(emp, ingest.events, fnv1a64(bytes));

    EngineMetrics empirical;
    json engines = json::object();
    for (const auto& r : results) {
        empirical[r.engine] = r.metrics;
        engines[std::string(to_string(r.engine))] = run_metrics_json(r.metrics);
    }

    json sim_source;
    EmpiricalComparison cmp;
    if (!sim_aggregate.empty()) {
        cmp = compare_empirical(engine_means_from_aggregate(read_json_file(sim_aggregate)), empirical);
        sim_source = {{"kind", "provided"}, {"aggregate_fnv1a64", hex64(fnv1a64(read_file(sim_aggregate)))}};
    } else {
        cmp = compare_empirical(monte_carlo(sim, {thread_cap(), false}), empirical);
        sim_source = {{"kind", "fresh"}, {"runs", sim.runs}, {"events_per_run", sim.events_per_run},
                      {"base_seed", sim.base_seed}};
    }

    const auto summary = summarize_dataset(records);
    const json doc{{"schema_version", kSchemaVersion},
                   {"dataset", dataset_summary_json(summary)},
                   {"engines", engines},
                   {"simulation", sim_source},
                   {"comparison", comparison_json(cmp)},
                   {"warnings", ingest.warnings}};
    ensure_dir(out_dir);
    write_file(fs::path(out_dir) / "empirical.json", dump_json(doc));
    write_file(fs::path(out_dir) / "manifest.json",
               dump_json(manifest_json("empirical", sim, {{"dataset_fnv1a64", hex64(fnv1a64(bytes))}})));
    for (const auto& r : results)
        std::cout << to_string(r.engine) << ": tii=" << format_number(r.metrics.tii)
                  << " sae=" << format_number(r.metrics.sae) << " ital=" << format_number(r.metrics.ital) << '\n';
    std::cout << "pearson r (simulated vs empirical) = " << format_number(cmp.pearson_r) << '\n';
    return kExitOk;
}

int cmd_stats_check(const std::string& fixtures, bool verbose) {
    const auto checks = check_stats_fixtures(read_json_file(fixtures));
    std::size_t failed = 0;
    for (const auto& c : checks) {
        if (!c.pass) ++failed;
        if (!c.pass || verbose)
            std::cout << (c.pass ? "ok   " : "FAIL ") << c.case_name << ' ' << c.quantity
                      << " expected=" << format_number(c.expected) << " actual=" << format_number(c.actual) << '\n';
    }
    std::cout << checks.size() - failed << '/' << checks.size() << " fixture checks passed\n";
    return failed == 0 ? kExitOk : kExitCheckFailed;
}

int cmd_report(const std::string& bundle, const std::string& out) {
    fs::path path(bundle);
    if (fs::is_directory(path)) path /= "aggregate.json";
    const std::string text = render_report(read_json_file(path));
    if (!out.empty()) write_file(out, text);
    std::cout << text;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-trust policy engine simulator and evaluation harness"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    RunFlags sim_flags, mc_flags, sens_flags, emp_flags;

    auto* simulate = app.add_subcommand("simulate", "Run one paired simulation and print its metrics");
    sim_flags.add_to(simulate, false);
    std::uint32_t run_index = 0;
    std::string sim_out;
    bool sim_logs = false;
    simulate->add_option("--run-index", run_index, "Run index (seed = base seed + index)");
    simulate->add_option("--out-dir", sim_out, "Write metrics, manifest and optional logs here");
    simulate->add_flag("--logs", sim_logs, "Also write per-engine decision logs");

    auto* mc = app.add_subcommand("monte-carlo", "Monte Carlo comparison of both engines");
    mc_flags.add_to(mc);
    std::string mc_out = "results";
    bool mc_logs = false;
    mc->add_option("--out-dir", mc_out, "Bundle output directory");
    mc->add_flag("--logs", mc_logs, "Also write raw decision logs");

    auto* sens = app.add_subcommand("sensitivity", "One-factor-at-a-time sensitivity analysis");
    sens_flags.add_to(sens);
    std::vector<std::string> params;
    std::string grid_file, sens_out = "sensitivity";
    sens->add_option("--param", params, "name=v1,v2,... (repeatable)");
    sens->add_option("--grid", grid_file, "JSON file mapping parameter names to value lists");
    sens->add_option("--out-dir", sens_out, "Output directory");

    auto* gen = app.add_subcommand("gen-dataset", "Generate the calibrated transaction dataset");
    std::size_t n = 10000;
    std::uint64_t gen_seed = 7;
    std::string gen_out;
    gen->add_option("--n", n, "Number of records");
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    auto* emp = app.add_subcommand("empirical", "Run both engines over a transaction dataset");
    emp_flags.add_to(emp);
    std::string dataset, sim_aggregate, emp_out = "empirical";
    emp->add_option("--dataset", dataset, "Transaction CSV")->required();
    emp->add_option("--sim-aggregate", sim_aggregate, "aggregate.json to compare against");
    emp->add_option("--out-dir", emp_out, "Output directory");

    auto* check = app.add_subcommand("stats-check", "Verify the statistics suite against frozen fixtures");
    std::string fixtures = ZTBENCH_DEFAULT_FIXTURES;
    bool verbose = false;
    check->add_option("--fixtures", fixtures, "Fixture JSON");
    check->add_flag("--verbose", verbose, "Print every check");

    auto* report = app.add_subcommand("report", "Render an aggregate bundle as a comparison table");
    std::string bundle, report_out;
    report->add_option("bundle", bundle, "Bundle directory or aggregate.json")->required();
    report->add_option("--out", report_out, "Also write the table to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_flags, run_index, sim_out, sim_logs);
        if (mc->parsed()) return cmd_monte_carlo(mc_flags, mc_out, mc_logs);
        if (sens->parsed()) return cmd_sensitivity(sens_flags, params, grid_file, sens_out);
        if (gen->parsed()) return cmd_gen_dataset(n, gen_seed, gen_out);
        if (emp->parsed()) return cmd_empirical(emp_flags, dataset, sim_aggregate, emp_out);
        if (check->parsed()) return cmd_stats_check(fixtures, verbose);
        if (report->parsed()) return cmd_report(bundle, report_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    return kExitUsage;
}
