#include "ztbench/fixture_check.hpp"

#include "ztbench/errors.hpp"
#include "ztbench/stats.hpp"

#include <cmath>

namespace ztbench {

std::vector<FixtureCheck> check_stats_fixtures(const nlohmann::json& doc) {
    std::vector<FixtureCheck> out;
    try {
        const double tol_s = doc.at("tolerance").at("statistic").get<double>();
        const double tol_p = doc.at("tolerance").at("p_value").get<double>();
        for (const auto& c : doc.at("cases")) {
            const std::string name = c.at("name").get<std::string>();
            const auto a = c.at("a").get<std::vector<double>>();
            const auto b = c.at("b").get<std::vector<double>>();
            auto check = [&](const std::string& what, const nlohmann::json& expected, double actual, double tol) {
                const double e = expected.get<double>();
                out.push_back({name, what, e, actual, tol, std::fabs(actual - e) <= tol});
            };

            const auto sa = stats::shapiro_wilk(a), sb = stats::shapiro_wilk(b);
            check("shapiro_a.w", c.at("shapiro_a").at("w"), sa.statistic, tol_s);
            check("shapiro_a.p", c.at("shapiro_a").at("p"), sa.p_value, tol_p);
            check("shapiro_b.w", c.at("shapiro_b").at("w"), sb.statistic, tol_s);
            check("shapiro_b.p", c.at("shapiro_b").at("p"), sb.p_value, tol_p);

            const auto w = stats::welch_t(a, b);
            check("welch.t", c.at("welch").at("t"), w.statistic, tol_s);
            check("welch.df", c.at("welch").at("df"), *w.df, tol_s);
            check("welch.p", c.at("welch").at("p"), w.p_value, tol_p);

            const auto m = stats::mann_whitney_u(a, b);
            check("mann_whitney.u", c.at("mann_whitney").at("u"), m.statistic, tol_s);
            check("mann_whitney.p", c.at("mann_whitney").at("p"), m.p_value, tol_p);
            check("mann_whitney.rank_biserial", c.at("mann_whitney").at("rank_biserial"), *m.effect_size, tol_s);

            check("cohens_d", c.at("cohens_d"), stats::cohens_d(a, b), tol_s);
            if (c.contains("pearson_r")) check("pearson_r", c.at("pearson_r"), stats::pearson_r(a, b), tol_s);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed fixture document: ") + e.what());
    }
    return out;
}

} // namespace ztbench
