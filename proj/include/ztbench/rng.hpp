#pragma once

#include <cstdint>
#include <random>

namespace ztbench {

// splitmix64 finalizer; used to derive independent seeds from ids.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seeded random source with platform-stable variates.
///
/// std::mt19937_64 output is fully specified by the standard, but the
/// <random> distributions are not, so every variate is derived here from raw
/// engine output. Identical seeds give identical streams on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Uniform integer on [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double lognormal(double mu, double sigma);
    double gamma(double shape);
    double beta(double a, double b);

    /// Index drawn from a discrete distribution given by non-negative weights.
    template <typename Range>
    std::size_t categorical(const Range& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        std::size_t i = 0;
        std::size_t last = 0;
        for (double w : weights) {
            if (w > 0.0) {
                last = i;
                if (u < w) return i;
                u -= w;
            }
            ++i;
        }
        return last;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ztbench
