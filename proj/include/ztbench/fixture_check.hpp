#pragma once

#include "json.hpp"

#include <string>
#include <vector>

namespace ztbench {

struct FixtureCheck {
    std::string case_name;
    std::string quantity;
    double expected = 0.0;
    double actual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Recomputes every statistic in a frozen reference-fixture document and
/// compares it with the recorded value. Statistics use the document's
/// statistic tolerance, p-values its p_value tolerance.
std::vector<FixtureCheck> check_stats_fixtures(const nlohmann::json& doc);

} // namespace ztbench
