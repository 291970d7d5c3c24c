#include "doctest.h"

#include "ztbench/dataset.hpp"
#include "ztbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

using namespace ztbench;

namespace {

const std::vector<TransactionRecord>& dataset_10k() {
    static const auto records = generate_dataset(10000, 7);
    return records;
}

std::string to_csv(std::span<const TransactionRecord> r) {
    std::ostringstream out;
    write_csv(out, r);
    return out.str();
}

std::vector<TransactionRecord> from_csv(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

const std::string kHeader(kCsvHeader);

} // namespace

TEST_CASE("calibration of the 10k dataset") {
    const auto& recs = dataset_10k();
    const auto s = summarize_dataset(recs);
    CHECK(s.rows == 10000);
    CHECK(s.fraud_rows == 350);
    CHECK(s.users == 1000);
    CHECK(s.devices == 1033);
    CHECK(s.amount_mean == doctest::Approx(352.07).epsilon(0.10));
    CHECK(s.amount_median == doctest::Approx(94.22).epsilon(0.10));

    // 350 split over 21.4 / 18.6 / 15.7 / 17.1 / 14.3 / 8.0 / 4.9 percent.
    const std::map<std::string, double> expected{
        {"credential_compromise", 74.9}, {"insider_lateral", 65.1}, {"api_abuse", 54.95},
        {"money_laundering", 59.85},     {"session_hijack", 50.05}, {"card_theft", 28.0},
        {"synthetic_identity", 17.15}};
    for (const auto& [kind, target] : expected) {
        CAPTURE(kind);
        CHECK(std::abs(static_cast<double>(s.scenario_counts.at(kind)) - target) <= 1.0);
    }

    std::set<std::string> services, channels, regions;
    for (const auto& r : recs) {
        services.insert(r.service);
        channels.insert(std::string(to_string(r.channel)));
        regions.insert(std::to_string(r.geolocation));
    }
    CHECK(services.size() == 9);
    CHECK(channels.size() == 5);
    CHECK(regions.size() == 15);
}

TEST_CASE("fraud count scales with n") {
    for (std::size_t n : {100u, 1000u, 2500u}) {
        const auto s = summarize_dataset(generate_dataset(n, 1));
        CHECK(s.rows == n);
        CHECK(s.fraud_rows == static_cast<std::size_t>(std::llround(0.035 * static_cast<double>(n))));
    }
    CHECK_THROWS_AS(generate_dataset(99, 1), ConfigError);
}

TEST_CASE("records are well formed and ordered") {
    const auto& recs = dataset_10k();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        REQUIRE(recs[i].transaction_id == i + 1);
        REQUIRE(recs[i].geolocation < kRegionCount);
        REQUIRE(recs[i].amount > 0.0);
        if (i > 0) REQUIRE(parse_timestamp(recs[i - 1].timestamp) <= parse_timestamp(recs[i].timestamp));
    }
}

TEST_CASE("generation is deterministic") {
    CHECK(to_csv(generate_dataset(2000, 11)) == to_csv(generate_dataset(2000, 11)));
    CHECK(to_csv(generate_dataset(2000, 11)) != to_csv(generate_dataset(2000, 12)));
}

TEST_CASE("CSV round trip is lossless") {
    const auto& recs = dataset_10k();
    const std::string text = to_csv(recs);
    CHECK(text.rfind(kHeader + "\n", 0) == 0);
    const auto back = from_csv(text);
    CHECK(back == recs);
    CHECK(to_csv(back) == text);
}

TEST_CASE("timestamps") {
    CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_timestamp("2023-01-01T00:00:00Z") == 1672531200);
    CHECK(format_timestamp(1672531200 + 3661) == "2023-01-01T01:01:01Z");
    CHECK_THROWS_AS(parse_timestamp("2023-02-30T00:00:00Z"), DataError);
    CHECK_THROWS_AS(parse_timestamp("2023-01-01 00:00:00"), DataError);
}

TEST_CASE("CSV errors name the line") {
    CHECK_THROWS_WITH_AS(from_csv(""), "empty dataset", DataError);
    CHECK_THROWS_AS(from_csv("id,foo\n"), DataError);
    CHECK_THROWS_AS(from_csv(kHeader + "\n"), DataError);

    const std::string good = "1,2023-01-01T00:00:00Z,U00001,D00001,payments,web,3,12.50,0,\n";
    CHECK(from_csv(kHeader + "\n" + good).size() == 1);
    // Windows line endings and a byte-order mark are tolerated.
    CHECK(from_csv("\xEF\xBB\xBF" + kHeader + "\r\n" + good).size() == 1);

    const std::string missing_scenario = "2,2023-01-01T00:00:01Z,U00001,D00001,payments,web,3,12.50,1,\n";
    CHECK_THROWS_WITH(from_csv(kHeader + "\n" + good + missing_scenario),
                      "line 3: fraud_flag=1 with empty fraud_scenario");
    const std::string stray = "2,2023-01-01T00:00:01Z,U00001,D00001,payments,web,3,12.50,0,api_abuse\n";
    CHECK_THROWS_AS(from_csv(kHeader + "\n" + stray), DataError);
    const std::string bad_channel = "2,2023-01-01T00:00:01Z,U00001,D00001,payments,fax,3,12.50,0,\n";
    CHECK_THROWS_AS(from_csv(kHeader + "\n" + bad_channel), DataError);
    const std::string bad_region = "2,2023-01-01T00:00:01Z,U00001,D00001,payments,web,15,12.50,0,\n";
    CHECK_THROWS_AS(from_csv(kHeader + "\n" + bad_region), DataError);
    const std::string short_row = "2,2023-01-01T00:00:01Z,U00001,D00001,payments,web,3\n";
    CHECK_THROWS_WITH(from_csv(kHeader + "\n" + short_row), "line 2: expected 10 fields, found 7");
}

TEST_CASE("ingest maps records onto events") {
    const auto& recs = dataset_10k();
    const auto ing = ingest_dataset(recs);
    CHECK(ing.events.size() == 10000);
    CHECK(ing.warnings.empty());
    CHECK(ing.users == 1000);
    CHECK(ing.devices == 1033);
    std::size_t attacks = 0;
    for (std::size_t i = 0; i < ing.events.size(); ++i) {
        const auto& e = ing.events[i];
        REQUIRE(e.time_index == i);
        REQUIRE(e.transaction.id == recs[i].transaction_id);
        REQUIRE(e.transaction.amount == recs[i].amount);
        REQUIRE(e.attack == recs[i].fraud_scenario);
        REQUIRE(e.transaction.normalized_risk >= 0.0);
        REQUIRE(e.transaction.normalized_risk <= 1.0);
        attacks += e.is_attack();
    }
    CHECK(attacks == 350);

    // Signals depend only on the record, not on its position in the file.
    const auto again = ingest_dataset(recs);
    CHECK(again.events.front().anomaly.user == ing.events.front().anomaly.user);
}

TEST_CASE("ingest reorders out-of-order input with a warning") {
    std::vector<TransactionRecord> recs(dataset_10k().begin(), dataset_10k().begin() + 200);
    std::swap(recs[3], recs[150]);
    const auto ing = ingest_dataset(recs);
    REQUIRE(ing.warnings.size() == 1);
    for (std::size_t i = 1; i < ing.events.size(); ++i)
        REQUIRE(ing.events[i - 1].transaction.id != ing.events[i].transaction.id);
    CHECK(ing.events[3].transaction.id == dataset_10k()[3].transaction_id);

    recs[0].service = "mystery";
    CHECK_THROWS_AS(ingest_dataset(recs), DataError);
    CHECK_THROWS_AS(ingest_dataset(std::span<const TransactionRecord>{}), DataError);
}
