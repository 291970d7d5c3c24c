#pragma once

#include "ztbench/metrics.hpp"
#include "ztbench/policy.hpp"
#include "ztbench/scenario.hpp"
#include "ztbench/stats.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ztbench {

enum class EngineKind : std::uint8_t { baseline, securebank };

std::string_view to_string(EngineKind e);
EngineKind parse_engine(std::string_view s);

/// Outcome model for step-up challenges. Each challenge draws a uniform
/// keyed by (stream seed, time index), so paired engines see the same draw.
struct ChallengeModel {
    double legit_pass_rate = 1.0;
    double attacker_pass_rate = 0.0;

    void validate() const;
    bool passes(std::uint64_t stream_seed, std::uint64_t time_index, bool attack) const;
};

struct RunConfig {
    std::uint32_t runs = 30;
    std::uint64_t events_per_run = 5000;
    std::uint64_t base_seed = 42;
    GeneratorConfig generator;
    PolicyConfig policy;
    BaselineRules baseline_rules;
    std::vector<EngineKind> engines{EngineKind::baseline, EngineKind::securebank};
    ChallengeModel challenge;
    std::size_t ital_window = 10;

    void validate() const;

    /// Generator and policy settings as a run uses them: run-level event count
    /// and seed, and service weights taken from the generator's zones.
    GeneratorConfig run_generator(std::uint32_t run_index) const;
    PolicyConfig run_policy() const;
    MetricsParams metrics_params(EngineKind engine) const;
};

struct RunResult {
    EngineKind engine = EngineKind::baseline;
    std::uint32_t run_index = 0;
    RunMetrics metrics;
    std::vector<DecisionRecord> log;
};

/// Feeds one event stream through every selected engine in lockstep.
/// next() returns nullptr at the end of the stream.
std::vector<RunResult> run_stream(const RunConfig& config, const std::function<const Event*()>& next,
                                  std::uint64_t challenge_seed, std::uint32_t run_index = 0,
                                  bool keep_log = true);

/// run_stream over a prepared event sequence, such as an ingested dataset.
std::vector<RunResult> run_events(const RunConfig& config, std::span<const Event> events,
                                  std::uint64_t challenge_seed, bool keep_log = false);

/// One simulated run seeded at base_seed + run_index, shared by all engines.
std::vector<RunResult> run_once(const RunConfig& config, std::uint32_t run_index, bool keep_log = true);
RunResult run_once(const RunConfig& config, std::uint32_t run_index, EngineKind engine, bool keep_log = true);

/// Events exactly as run_once would see them.
std::vector<Event> simulate_events(const RunConfig& config, std::uint32_t run_index);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;

    bool operator==(const MetricSummary&) const = default;
};

/// Sample sd with the n-1 denominator; 0 for a single value.
MetricSummary summarize(std::span<const double> values);

struct EngineAggregate {
    EngineKind engine = EngineKind::baseline;
    std::vector<RunMetrics> runs;
    // Keyed by scalar metric name; a metric missing from any run is omitted.
    std::map<std::string, MetricSummary> summary;
    std::map<std::string, MetricSummary> per_service_tii;
    std::map<std::string, ScenarioOutcome> per_scenario;
    // Filled only when logs were requested.
    std::vector<std::vector<DecisionRecord>> logs;

    std::vector<double> values(const std::string& metric) const;
};

struct AggregateReport {
    std::uint32_t runs = 0;
    std::vector<EngineAggregate> engines;

    const EngineAggregate& at(EngineKind e) const;
    bool has(EngineKind e) const;
};

struct MonteCarloOptions {
    // 0 picks the hardware concurrency.
    unsigned threads = 0;
    bool keep_logs = false;
};

AggregateReport aggregate(std::vector<std::vector<RunResult>> per_run, std::uint32_t runs, bool keep_logs);

AggregateReport monte_carlo(const RunConfig& config, const MonteCarloOptions& options = {});

// ── Statistical protocol ─────────────────────────────────────────────────────

const std::vector<std::string>& headline_metrics();

struct MetricComparison {
    std::string metric;
    stats::Comparison comparison;
};

struct StatTestReport {
    double family_alpha = 0.05;
    double bonferroni_threshold = 0.0;
    std::vector<MetricComparison> metrics;
};

/// SecureBank against baseline on each headline metric, with a Bonferroni
/// family over the headline set.
StatTestReport stat_tests(const AggregateReport& report, double family_alpha = 0.05);

// ── Sensitivity ──────────────────────────────────────────────────────────────

/// Names accepted by apply_parameter and sensitivity_ofat.
const std::vector<std::string>& sensitivity_parameters();

/// Sets one named parameter; throws ConfigError for unknown names.
void apply_parameter(RunConfig& config, const std::string& name, double value);

using ParameterGrid = std::vector<std::pair<std::string, std::vector<double>>>;

ParameterGrid default_sensitivity_grid();

struct SensitivityPoint {
    double value = 0.0;
    // engine name -> metric -> mean over runs
    std::map<std::string, std::map<std::string, double>> means;
};

struct ParameterSensitivity {
    std::string parameter;
    std::vector<SensitivityPoint> points;
    // engine name -> metric -> CV of the per-point means; absent when mean is 0.
    std::map<std::string, std::map<std::string, std::optional<double>>> cv;
};

struct SensitivityReport {
    std::vector<ParameterSensitivity> parameters;
};

SensitivityReport sensitivity_ofat(const RunConfig& base, const ParameterGrid& grid,
                                   const MonteCarloOptions& options = {});

// ── Empirical comparison ─────────────────────────────────────────────────────

struct ComparisonRow {
    std::string engine;
    std::string metric;
    double simulated = 0.0;
    double empirical = 0.0;
    double abs_error = 0.0;
    std::optional<double> rel_error;
};

struct EmpiricalComparison {
    double pearson_r = 0.0;
    std::vector<ComparisonRow> rows;
};

using EngineMetrics = std::map<EngineKind, RunMetrics>;

/// Pearson r over the (engine, headline metric) vectors of the simulated means
/// and the empirical values.
EmpiricalComparison compare_empirical(const AggregateReport& sim, const EngineMetrics& empirical);
EmpiricalComparison compare_empirical(const EngineMetrics& sim, const EngineMetrics& empirical);

} // namespace ztbench
