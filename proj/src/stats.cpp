#include "ztbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ztbench::stats {

namespace {

using std::numbers::pi;

template <std::size_t N>
double horner(const double (&c)[N], double x) {
    double r = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
    return r;
}

void require_finite(std::span<const double> x, const char* what) {
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    return h;
}

struct Ranked {
    std::vector<double> ranks;
    double tie_term = 0.0; // sum of t^3 - t over tie groups
};

Ranked midranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    Ranked out;
    out.ranks.resize(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) out.ranks[idx[k]] = r;
        double t = static_cast<double>(j - i + 1);
        out.tie_term += t * t * t - t;
        i = j + 1;
    }
    return out;
}

} // namespace

// ── Distribution functions ───────────────────────────────────────────────────

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        throw std::invalid_argument("normal_quantile: p outside [0,1]");
    }
    static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                   1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                   4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                   3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[] = {1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                   5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                   3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                   5.2264952788528545610e+3};
    static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                   5.76949722146069140550e0, 3.64784832476320460504e0,
                                   1.27045825245236838258e0, 2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                                   6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                   1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                   1.05075007164441684324e-9};
    static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                   1.78482653991729133580e0, 2.96560571828504891230e-1,
                                   2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                   1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                   1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                   2.04426310338993978564e-15};

    double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        double r = 0.180625 - q * q;
        return q * horner(a, r) / horner(b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        z = horner(c, r) / horner(d, r);
    } else {
        r -= 5.0;
        z = horner(e, r) / horner(f, r);
    }
    return q < 0.0 ? -z : z;
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: shapes must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x outside [0,1]");
    if (x == 0.0 || x == 1.0) return x;
    double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("t_two_sided_p: df must be positive");
    if (std::isnan(t)) throw std::invalid_argument("t_two_sided_p: t is NaN");
    if (std::isinf(t)) return 0.0;
    return clamp_p(incomplete_beta(0.5 * df, 0.5, df / (df + t * t)));
}

// ── Descriptives ─────────────────────────────────────────────────────────────

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) {
        if (x.empty()) throw std::invalid_argument("variance of empty sample");
        return 0.0;
    }
    // Rounding in the mean would otherwise leave a tiny spread for constant input.
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) return 0.0;
    double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

// ── Tests ────────────────────────────────────────────────────────────────────

std::string_view to_string(TestKind k) {
    switch (k) {
        case TestKind::shapiro_wilk:   return "shapiro_wilk";
        case TestKind::welch_t:        return "welch_t";
        case TestKind::mann_whitney_u: return "mann_whitney_u";
    }
    return "unknown";
}

TestResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3) throw std::invalid_argument("shapiro_wilk: need at least 3 values");
    if (n > 5000) throw std::invalid_argument("shapiro_wilk: more than 5000 values");
    require_finite(sample, "shapiro_wilk");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 0.0)) throw std::invalid_argument("zero variance");

    // Half-vector of coefficients for the lower order statistics; the upper
    // half is its mirror with the sign flipped.
    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
        static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = horner(c1, rsn) - m[0] / ssumm2;
        std::size_t first = 1;
        double fac;
        if (n > 5) {
            const double a2 = -m[1] / ssumm2 + horner(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            first = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
    }

    // W is the squared correlation between the coefficients and the order
    // statistics; scaling by the range keeps the sums well conditioned.
    const double xm = mean(x);
    double sax = 0.0, ssa = 0.0, ssx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ai = 0.0;
        if (i < half) ai = -a[i];
        else if (n - 1 - i < half) ai = a[n - 1 - i];
        double xi = (x[i] - xm) / range;
        sax += ai * xi;
        ssa += ai * ai;
        ssx += xi * xi;
    }
    double w = std::min(1.0, sax * sax / (ssa * ssx));

    TestResult res;
    res.kind = TestKind::shapiro_wilk;
    res.statistic = w;

    if (n == 3) {
        res.p_value = clamp_p(6.0 / pi * (std::asin(std::sqrt(w)) - pi / 3.0));
        return res;
    }
    double y = std::log1p(-w);
    double mu, sigma;
    if (n <= 11) {
        double gamma = -2.273 + 0.459 * an;
        if (y >= gamma) {
            res.p_value = 0.0;
            return res;
        }
        y = -std::log(gamma - y);
        static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
        static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
        mu = horner(c3, an);
        sigma = std::exp(horner(c4, an));
    } else {
        static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
        static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
        double ln = std::log(an);
        mu = horner(c5, ln);
        sigma = std::exp(horner(c6, ln));
    }
    res.p_value = clamp_p(normal_sf((y - mu) / sigma));
    return res;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t: each sample needs at least 2 values");
    require_finite(a, "welch_t");
    require_finite(b, "welch_t");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
    if (va == 0.0 && vb == 0.0) throw std::invalid_argument("welch_t: both samples have zero variance");
    const double se2 = va + vb;
    TestResult res;
    res.kind = TestKind::welch_t;
    res.statistic = (mean(a) - mean(b)) / std::sqrt(se2);
    res.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    res.p_value = t_two_sided_p(res.statistic, *res.df);
    return res;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
    require_finite(a, "mann_whitney_u");
    require_finite(b, "mann_whitney_u");
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    const Ranked r = midranks(all);

    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double n = na + nb;
    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += r.ranks[i];
    const double u = rank_sum_a - na * (na + 1.0) / 2.0;

    const double mu = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)));

    TestResult res;
    res.kind = TestKind::mann_whitney_u;
    res.statistic = u;
    res.effect_size = 1.0 - 2.0 * u / (na * nb);
    if (!(var > 0.0)) {
        res.p_value = 1.0;
    } else {
        double z = (std::fabs(u - mu) - 0.5) / std::sqrt(var);
        res.p_value = clamp_p(2.0 * normal_sf(z));
    }
    return res;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("cohens_d: each sample needs at least 2 values");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled =
        ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
    if (!(pooled > 0.0)) throw std::invalid_argument("cohens_d: pooled variance is zero");
    return (mean(a) - mean(b)) / std::sqrt(pooled);
}

BonferroniResult bonferroni(std::span<const double> p_values, double family_alpha) {
    if (p_values.empty()) throw std::invalid_argument("bonferroni: no p-values");
    if (!(family_alpha > 0.0 && family_alpha < 1.0))
        throw std::invalid_argument("bonferroni: family alpha must lie in (0,1)");
    BonferroniResult out;
    out.threshold = family_alpha / static_cast<double>(p_values.size());
    out.significant.reserve(p_values.size());
    for (double p : p_values) out.significant.push_back(p < out.threshold);
    return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson_r: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson_r: need at least 2 points");
    require_finite(x, "pearson_r");
    require_finite(y, "pearson_r");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("undefined correlation");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double coeff_variation(std::span<const double> x) {
    const double m = mean(x);
    if (m == 0.0) throw std::invalid_argument("coeff_variation: mean is zero");
    return sample_sd(x) / m;
}

// ── Protocol ─────────────────────────────────────────────────────────────────

Comparison compare_samples(std::span<const double> a, std::span<const double> b, double normality_alpha) {
    auto normality = [](std::span<const double> s) -> std::optional<TestResult> {
        if (s.size() < 3 || s.size() > 5000) return std::nullopt;
        if (std::adjacent_find(s.begin(), s.end(), std::not_equal_to<>()) == s.end()) return std::nullopt;
        return shapiro_wilk(s);
    };

    Comparison c;
    c.shapiro_a = normality(a);
    c.shapiro_b = normality(b);
    c.both_normal = c.shapiro_a && c.shapiro_b && c.shapiro_a->p_value >= normality_alpha &&
                    c.shapiro_b->p_value >= normality_alpha;
    TestResult mw = mann_whitney_u(a, b);
    c.rank_biserial = *mw.effect_size;
    c.test = c.both_normal ? welch_t(a, b) : mw;
    if (a.size() >= 2 && b.size() >= 2) {
        try {
            c.cohens_d = cohens_d(a, b);
        } catch (const std::invalid_argument&) {
            c.cohens_d.reset();
        }
    }
    c.test.effect_size = c.both_normal ? c.cohens_d : std::optional<double>(c.rank_biserial);
    return c;
}

std::vector<Comparison> compare_family(std::span<const std::vector<double>> a,
                                       std::span<const std::vector<double>> b, double family_alpha) {
    if (a.size() != b.size()) throw std::invalid_argument("compare_family: metric count mismatch");
    std::vector<Comparison> out;
    std::vector<double> ps;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.push_back(compare_samples(a[i], b[i]));
        ps.push_back(out.back().test.p_value);
    }
    if (out.empty()) return out;
    auto flags = bonferroni(ps, family_alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].test.significant_after_correction = flags.significant[i];
    return out;
}

} // namespace ztbench::stats
