#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ztbench::stats {

// ── Distribution functions ───────────────────────────────────────────────────

double normal_cdf(double x);
/// Upper tail, 1 - Phi(x), without cancellation for large x.
double normal_sf(double x);
/// Inverse of normal_cdf on (0, 1) (Wichura's AS241, ~1e-16 relative).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with df degrees of freedom (df may be fractional).
double t_two_sided_p(double t, double df);

// ── Descriptives ─────────────────────────────────────────────────────────────

double mean(std::span<const double> x);
/// Sample variance with the n-1 denominator; 0 for a single value.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);

// ── Tests ────────────────────────────────────────────────────────────────────

enum class TestKind { shapiro_wilk, welch_t, mann_whitney_u };

std::string_view to_string(TestKind k);

struct TestResult {
    TestKind kind = TestKind::welch_t;
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> df;
    std::optional<double> effect_size;
    bool significant_after_correction = false;
};

/// Shapiro-Wilk W with Royston's coefficient and p-value approximations.
/// Requires 3 <= n <= 5000 and a non-constant sample.
TestResult shapiro_wilk(std::span<const double> x);

/// Two-sided Welch t test with Welch-Satterthwaite df.
TestResult welch_t(std::span<const double> a, std::span<const double> b);

/// Two-sided Mann-Whitney U test (normal approximation with tie and
/// continuity correction). statistic is U for sample a; effect_size is the
/// rank-biserial correlation 1 - 2U/(n_a n_b).
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Cohen's d with the (n-1)-weighted pooled standard deviation.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct BonferroniResult {
    double threshold = 0.0;
    std::vector<bool> significant;
};

BonferroniResult bonferroni(std::span<const double> p_values, double family_alpha = 0.05);

double pearson_r(std::span<const double> x, std::span<const double> y);

/// Sample standard deviation over the mean.
double coeff_variation(std::span<const double> x);

// ── Protocol ─────────────────────────────────────────────────────────────────

/// Normality check on both samples, then Welch when both pass at alpha and
/// Mann-Whitney otherwise. A constant sample counts as non-normal.
struct Comparison {
    std::optional<TestResult> shapiro_a;
    std::optional<TestResult> shapiro_b;
    bool both_normal = false;
    TestResult test;
    std::optional<double> cohens_d;
    double rank_biserial = 0.0;
};

Comparison compare_samples(std::span<const double> a, std::span<const double> b,
                           double normality_alpha = 0.05);

/// Runs compare_samples per metric and applies a Bonferroni family over them.
std::vector<Comparison> compare_family(std::span<const std::vector<double>> a,
                                       std::span<const std::vector<double>> b,
                                       double family_alpha = 0.05);

} // namespace ztbench::stats
