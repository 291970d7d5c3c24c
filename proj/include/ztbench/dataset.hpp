#pragma once

#include "ztbench/core_model.hpp"
#include "ztbench/metrics.hpp"
#include "ztbench/scenario.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ztbench {

struct TransactionRecord {
    std::uint64_t transaction_id = 0;
    std::string timestamp; // ISO-8601 UTC, e.g. 2023-01-01T00:00:00Z
    std::string user_id;
    std::string device_id;
    std::string service;
    Channel channel = Channel::web;
    std::uint32_t geolocation = 0;
    double amount = 0.0;
    std::optional<ScenarioKind> fraud_scenario;

    bool fraud_flag() const { return fraud_scenario.has_value(); }
    bool operator==(const TransactionRecord&) const = default;
};

/// Calibration targets for the generated transaction dataset.
struct DatasetProfile {
    double fraud_rate = 0.035;
    // Percent share per ScenarioKind.
    std::array<double, kScenarioCount> scenario_shares{21.4, 18.6, 15.7, 17.1, 14.3, 8.0, 4.9};
    double records_per_user = 10.0;
    double devices_per_user = 1.033;
    // Share of devices reused by device-centric fraud (session hijack, card theft).
    double compromised_device_share = 0.063;
    double amount_mean = 352.07;
    double amount_median = 94.22;
    double amount_cap = 1000.0;
    std::vector<ServiceZone> services{{"payments", 1.0},       {"settlement", 1.8},
                                      {"risk_analytics", 1.4}, {"aml", 1.8},
                                      {"customer_identity", 0.8}, {"administration", 2.0},
                                      {"cards", 1.0},          {"lending", 1.2},
                                      {"treasury", 1.6}};
    std::vector<double> service_traffic{0.30, 0.10, 0.08, 0.07, 0.20, 0.05, 0.10, 0.05, 0.05};
    std::chrono::sys_days start{std::chrono::year{2023} / std::chrono::January / 1};
    int span_months = 18;

    void validate() const;

    /// Generator settings matching this profile, used for the population,
    /// scenario signatures and ingest-time anomaly signals.
    GeneratorConfig generator(std::size_t n_records) const;
    std::uint32_t users_for(std::size_t n_records) const;
    std::uint32_t devices_for(std::size_t n_records) const;
    std::uint64_t fraud_count(std::size_t n_records) const;
    /// Largest-remainder split of fraud_count over scenario_shares.
    std::array<std::uint64_t, kScenarioCount> scenario_counts(std::size_t n_records) const;
};

/// Calibrated synthetic dataset, sorted by timestamp with ids 1..n.
/// Throws ConfigError for n < 100.
std::vector<TransactionRecord> generate_dataset(std::size_t n, std::uint64_t seed, const DatasetProfile& profile = {});

struct DatasetSummary {
    std::size_t rows = 0;
    std::size_t fraud_rows = 0;
    double fraud_rate = 0.0;
    double amount_mean = 0.0;
    double amount_median = 0.0;
    double amount_sd = 0.0;
    std::size_t users = 0;
    std::size_t devices = 0;
    // Distinct devices carrying session-hijack or card-theft fraud.
    std::size_t compromised_devices = 0;
    std::map<std::string, std::size_t> scenario_counts;
};

DatasetSummary summarize_dataset(std::span<const TransactionRecord> records);

inline constexpr std::string_view kCsvHeader =
    "transaction_id,timestamp,user_id,device_id,service,channel,geolocation,amount,fraud_flag,fraud_scenario";

void write_csv(std::ostream& out, std::span<const TransactionRecord> records);

/// Parses the CSV schema. Malformed rows raise DataError naming the line.
std::vector<TransactionRecord> read_csv(std::istream& in);

/// Seconds since the epoch for an ISO-8601 UTC timestamp (YYYY-MM-DDTHH:MM:SSZ).
std::int64_t parse_timestamp(std::string_view s);
std::string format_timestamp(std::int64_t epoch_seconds);

struct IngestResult {
    std::vector<Event> events;
    std::vector<std::string> warnings;
    std::size_t users = 0;
    std::size_t devices = 0;
};

/// Maps records onto the simulation event format: stable-sorted by time,
/// dense user/device indices by first appearance, scenario signals drawn
/// from a seed derived from each transaction id.
IngestResult ingest_dataset(std::span<const TransactionRecord> records, const DatasetProfile& profile = {});

} // namespace ztbench
