#pragma once

#include "ztbench/dataset.hpp"
#include "ztbench/harness.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

namespace ztbench {

inline constexpr std::string_view kToolName = "ztbench";
inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// Fixed notation with 6 significant digits and a '.' decimal point,
/// independent of the global locale. Integral JSON values print as integers.
std::string format_number(double v);

/// JSON text with 2-space indentation, keys in sorted order and every
/// floating-point value passed through format_number.
std::string dump_json(const nlohmann::json& doc);
void write_json(std::ostream& out, const nlohmann::json& doc);

nlohmann::json run_metrics_json(const RunMetrics& m);
nlohmann::json aggregate_json(const AggregateReport& report);
/// engine,metric,mean,std,min,max; one row per engine and scalar metric.
std::string aggregate_csv(const AggregateReport& report);
nlohmann::json stat_tests_json(const StatTestReport& report);
nlohmann::json sensitivity_json(const SensitivityReport& report);
/// parameter,value,engine,metric,mean
std::string sensitivity_csv(const SensitivityReport& report);
nlohmann::json comparison_json(const EmpiricalComparison& c);
nlohmann::json dataset_summary_json(const DatasetSummary& s);
std::string decision_log_csv(std::span<const DecisionRecord> log);

/// Run manifest: tool version, subcommand, resolved config and seeds.
nlohmann::json manifest_json(std::string_view command, const RunConfig& config, nlohmann::json extra = {});

/// Per-engine metric means read back from an aggregate.json document.
EngineMetrics engine_means_from_aggregate(const nlohmann::json& aggregate);

/// (securebank - baseline) / baseline * 100; empty when baseline is 0.
std::optional<double> relative_delta(double baseline, double securebank);

/// Aligned text table comparing the two engines of an aggregate.json
/// document: mean +/- std per engine, absolute and relative difference.
std::string render_report(const nlohmann::json& aggregate);

} // namespace ztbench
