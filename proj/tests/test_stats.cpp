#include "doctest.h"

#include "ztbench/rng.hpp"
#include "ztbench/stats.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <vector>

using namespace ztbench;
using namespace ztbench::stats;
using Vec = std::vector<double>;

namespace {

nlohmann::json load_fixtures() {
    std::ifstream in(std::string(ZTBENCH_FIXTURE_DIR) + "/stats_fixtures.json");
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

} // namespace

TEST_CASE("normal functions") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
    for (double p = 0.001; p < 1.0; p += 0.0137)
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS(normal_quantile(1.5));
}

TEST_CASE("incomplete beta and t tail") {
    // I_x(1,1) = x; I_x(a,1) = x^a.
    CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(incomplete_beta(3.0, 1.0, 0.5) == doctest::Approx(0.125).epsilon(1e-14));
    // Cauchy (df = 1): P(|T| > 1) = 0.5.
    CHECK(t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    // df = 2 has closed form 1 - t / sqrt(2 + t^2).
    for (double t : {0.1, 0.7, 2.5, 9.0})
        CHECK(t_two_sided_p(t, 2.0) == doctest::Approx(1.0 - t / std::sqrt(2.0 + t * t)).epsilon(1e-12));
    CHECK(t_two_sided_p(0.0, 7.3) == 1.0);
    CHECK(t_two_sided_p(-2.0, 5.0) == t_two_sided_p(2.0, 5.0));
}

TEST_CASE("shapiro_wilk examples") {
    // Expected normal order statistics for n = 10 give W near 1.
    Vec q;
    for (int i = 1; i <= 10; ++i) q.push_back(normal_quantile((i - 0.375) / 10.25));
    auto r = shapiro_wilk(q);
    CHECK(r.statistic > 0.98);
    CHECK(r.statistic <= 1.0);

    CHECK_THROWS_WITH(shapiro_wilk(Vec{1, 1, 1}), "zero variance");
    CHECK_THROWS(shapiro_wilk(Vec{1, 2}));

    Vec bimodal(15, 0.0);
    bimodal.insert(bimodal.end(), 15, 1.0);
    CHECK(shapiro_wilk(bimodal).p_value < 0.01);
}

TEST_CASE("welch_t examples") {
    Vec a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
    auto r = welch_t(a, b);
    CHECK(r.statistic == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(*r.df == doctest::Approx(8.0).epsilon(1e-12));

    auto same = welch_t(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);

    auto swapped = welch_t(b, a);
    CHECK(swapped.statistic == -r.statistic);
    CHECK(swapped.p_value == r.p_value);

    CHECK_THROWS(welch_t(Vec{1, 1}, Vec{2, 2}));
}

TEST_CASE("welch_t matches pooled t for balanced equal-variance samples") {
    Vec a{1.0, 2.5, 3.0, 4.5}, b{2.0, 3.5, 4.0, 5.5};
    auto r = welch_t(a, b);
    double sp2 = (sample_variance(a) + sample_variance(b)) / 2.0;
    double t = (mean(a) - mean(b)) / std::sqrt(sp2 * (0.5));
    CHECK(r.statistic == doctest::Approx(t).epsilon(1e-9));
    CHECK(*r.df == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("mann_whitney_u examples") {
    auto sep = mann_whitney_u(Vec{1, 2}, Vec{3, 4});
    CHECK(sep.statistic == 0.0);
    CHECK(*sep.effect_size == 1.0);

    Vec a{3, 1, 4, 1, 5, 9, 2, 6};
    Vec b{9, 6, 5, 4, 3, 2, 1, 1};
    CHECK(std::fabs(*mann_whitney_u(a, b).effect_size) < 1e-12);
}

TEST_CASE("cohens_d examples") {
    Vec a{1, 2, 3};
    CHECK(cohens_d(a, a) == 0.0);
    // Means 10 and 8, both variances 1.
    CHECK(cohens_d(Vec{9, 10, 11}, Vec{7, 8, 9}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(cohens_d(Vec{0, 2}, Vec{-1, 1}) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS(cohens_d(Vec{1, 1}, Vec{1, 1}));
}

TEST_CASE("bonferroni") {
    Vec ps{0.0001, 0.02, 0.016};
    auto r = bonferroni(ps);
    CHECK(r.threshold == doctest::Approx(0.05 / 3.0).epsilon(1e-15));
    CHECK(std::round(r.threshold * 1e6) / 1e6 == doctest::Approx(0.016667).epsilon(1e-12));
    CHECK(r.significant == std::vector<bool>{true, false, true});
    CHECK(bonferroni(Vec{0.3}, 0.1).threshold == 0.1);
    CHECK_THROWS(bonferroni(Vec{}));
    CHECK_THROWS(bonferroni(Vec{0.1}, 1.0));
}

TEST_CASE("pearson_r and coeff_variation") {
    Vec x{1, 2, 3}, y{2, 4, 6};
    CHECK(pearson_r(x, y) == doctest::Approx(1.0).epsilon(1e-15));
    Vec z{0.3, -1.2, 4.4, 2.0, 0.1};
    CHECK(pearson_r(z, z) == 1.0);
    Vec neg;
    for (double v : z) neg.push_back(-v);
    CHECK(pearson_r(z, neg) == -1.0);
    CHECK_THROWS_WITH(pearson_r(Vec{1, 1, 1}, x), "undefined correlation");

    CHECK(coeff_variation(Vec{0.4, 0.5, 0.6}) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(coeff_variation(Vec{3, 3, 3}) == 0.0);
    CHECK_THROWS(coeff_variation(Vec{-1, 1}));
}

TEST_CASE("randomized properties") {
    Rng rng(99);
    for (int iter = 0; iter < 500; ++iter) {
        std::size_t na = 2 + rng.below(30), nb = 2 + rng.below(30);
        Vec a, b;
        for (std::size_t i = 0; i < na; ++i) a.push_back(std::round(rng.normal(0, 2) * 4) / 4);
        for (std::size_t i = 0; i < nb; ++i) b.push_back(std::round(rng.normal(0.5, 2) * 4) / 4);

        auto ab = mann_whitney_u(a, b), ba = mann_whitney_u(b, a);
        CHECK(ab.statistic + ba.statistic == static_cast<double>(na * nb));
        CHECK(ab.p_value >= 0.0);
        CHECK(ab.p_value <= 1.0);

        if (sample_variance(a) > 0 || sample_variance(b) > 0) {
            auto w = welch_t(a, b);
            CHECK(std::isfinite(w.statistic));
            CHECK(w.p_value >= 0.0);
            CHECK(w.p_value <= 1.0);
        }
        if (a.size() >= 3 && sample_variance(a) > 0) {
            auto s = shapiro_wilk(a);
            CHECK(s.statistic > 0.0);
            CHECK(s.statistic <= 1.0);
            CHECK(s.p_value >= 0.0);
            CHECK(s.p_value <= 1.0);
        }
        std::size_t n = std::min(na, nb);
        Vec x(a.begin(), a.begin() + n), y(b.begin(), b.begin() + n);
        if (sample_variance(x) > 0 && sample_variance(y) > 0) {
            double r = pearson_r(x, y);
            double scale = rng.uniform(0.1, 10.0), shift = rng.uniform(-5, 5);
            Vec xt;
            for (double v : x) xt.push_back(scale * v + shift);
            CHECK(pearson_r(xt, y) == doctest::Approx(r).epsilon(1e-12));
        }
        double c = rng.uniform(0.5, 3.0);
        Vec pos, scaled;
        for (double v : a) pos.push_back(std::fabs(v) + 1.0);
        for (double v : pos) scaled.push_back(c * v);
        CHECK(coeff_variation(scaled) == doctest::Approx(coeff_variation(pos)).epsilon(1e-12));
    }
}

TEST_CASE("protocol chooses test by normality") {
    Rng rng(1);
    Vec a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back(rng.normal(0.94, 0.005));
        b.push_back(rng.normal(0.65, 0.02));
    }
    auto c = compare_samples(a, b);
    CHECK(c.both_normal);
    CHECK(c.test.kind == TestKind::welch_t);

    Vec zeros(30, 0.0);
    auto z = compare_samples(zeros, b);
    CHECK_FALSE(z.both_normal);
    CHECK(z.test.kind == TestKind::mann_whitney_u);
    CHECK(z.test.p_value < 0.001);
}

TEST_CASE("frozen reference fixtures") {
    auto fx = load_fixtures();
    const double tol_s = fx["tolerance"]["statistic"];
    const double tol_p = fx["tolerance"]["p_value"];
    REQUIRE(fx["cases"].size() >= 10);
    for (const auto& c : fx["cases"]) {
        Vec a = c["a"], b = c["b"];
        CAPTURE(c["name"].get<std::string>());

        auto sa = shapiro_wilk(a), sb = shapiro_wilk(b);
        CHECK(std::fabs(sa.statistic - c["shapiro_a"]["w"].get<double>()) <= tol_s);
        CHECK(std::fabs(sa.p_value - c["shapiro_a"]["p"].get<double>()) <= tol_p);
        CHECK(std::fabs(sb.statistic - c["shapiro_b"]["w"].get<double>()) <= tol_s);
        CHECK(std::fabs(sb.p_value - c["shapiro_b"]["p"].get<double>()) <= tol_p);

        auto w = welch_t(a, b);
        CHECK(std::fabs(w.statistic - c["welch"]["t"].get<double>()) <= tol_s);
        CHECK(std::fabs(*w.df - c["welch"]["df"].get<double>()) <= tol_s);
        CHECK(std::fabs(w.p_value - c["welch"]["p"].get<double>()) <= tol_p);

        auto m = mann_whitney_u(a, b);
        CHECK(std::fabs(m.statistic - c["mann_whitney"]["u"].get<double>()) <= tol_s);
        CHECK(std::fabs(m.p_value - c["mann_whitney"]["p"].get<double>()) <= tol_p);
        CHECK(std::fabs(*m.effect_size - c["mann_whitney"]["rank_biserial"].get<double>()) <= tol_s);

        CHECK(std::fabs(cohens_d(a, b) - c["cohens_d"].get<double>()) <= tol_s);
        if (c.contains("pearson_r"))
            CHECK(std::fabs(pearson_r(a, b) - c["pearson_r"].get<double>()) <= tol_s);
    }
}
