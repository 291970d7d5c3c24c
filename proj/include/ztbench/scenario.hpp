#pragma once

#include "ztbench/core_model.hpp"
#include "ztbench/metrics.hpp"
#include "ztbench/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace ztbench {

inline constexpr std::uint32_t kRegionCount = 15;

/// Channel and region risk tables feeding normalized_risk.
double channel_risk(Channel c);
double region_risk(std::uint32_t region);

/// R = clip(0.5 * min(amount / cap, 1) + 0.3 * channel_risk + 0.2 * region_risk).
double normalized_risk(double amount, Channel channel, std::uint32_t region, double amount_cap);

/// Context entity for a (region, channel) pair.
inline EntityId context_of(std::uint32_t region, Channel channel) {
    return context_id(region * static_cast<std::uint32_t>(kChannelCount) + static_cast<std::uint32_t>(channel));
}

struct BetaShape {
    double a = 1.0;
    double b = 1.0;

    double mean() const { return a / (a + b); }
};

struct ChainLength {
    std::uint32_t min = 1;
    std::uint32_t max = 1;
};

struct GeneratorConfig {
    std::uint32_t n_users = 500;
    std::uint32_t n_devices = 800;
    std::uint64_t n_events = 5000;
    double attack_probability = 0.05;
    std::uint64_t base_seed = 42;
    // Indexed by ScenarioKind. The last two kinds are dataset-only by default.
    std::array<double, kScenarioCount> scenario_mix{0.2, 0.2, 0.2, 0.2, 0.2, 0.0, 0.0};
    std::vector<ServiceZone> service_zones{{"Payment Processing", 1.0},
                                           {"Settlement and Clearing", 1.8},
                                           {"Risk and Analytics", 1.4},
                                           {"Customer Identity", 0.8},
                                           {"Administration", 2.0}};
    // Share of users whose home zone is each service zone.
    std::vector<double> zone_traffic{0.35, 0.15, 0.15, 0.25, 0.10};

    BetaShape benign_anomaly{1.0, 9.0};
    // Primary-channel shape per scenario; money laundering ramps from its own
    // schedule instead.
    std::array<BetaShape, kScenarioCount> attack_anomaly{
        BetaShape{6, 2}, BetaShape{6, 2}, BetaShape{6, 2}, BetaShape{6, 2},
        BetaShape{6, 2}, BetaShape{6, 2}, BetaShape{6, 2}};
    BetaShape attack_secondary{3.0, 4.0};
    std::array<ChainLength, kScenarioCount> chain_length{
        ChainLength{2, 4}, ChainLength{2, 5}, ChainLength{3, 8}, ChainLength{3, 8},
        ChainLength{2, 4}, ChainLength{1, 3}, ChainLength{1, 3}};

    // Lognormal amount model given by its median and mean.
    double amount_median = 94.22;
    double amount_mean = 352.07;
    // Share of the log-amount spread explained by a per-user offset.
    double user_spend_sigma = 0.5;
    double amount_cap = 1000.0;

    double home_region_prob = 0.9;
    double preferred_channel_prob = 0.7;
    double home_zone_prob = 0.8;
    // Regions [0, home_regions) are home regions; benign travel stays below
    // roaming_regions. The remaining regions are only reached by attacks.
    std::uint32_t home_regions = 10;
    std::uint32_t roaming_regions = 14;
    // Chance that a credential compromise originates in the last region.
    double hostile_region_prob = 0.03;

    void validate() const;

    double log_mu() const;
    double log_sigma() const;
};

struct UserProfile {
    std::uint32_t home_region = 0;
    std::uint32_t home_zone = 0;
    Channel preferred_channel = Channel::web;
    double spend_offset = 0.0;
    std::vector<std::uint32_t> devices;

    bool operator==(const UserProfile&) const = default;
};

struct Population {
    std::vector<UserProfile> users;
    std::vector<std::uint32_t> device_owner;

    bool operator==(const Population&) const = default;
};

/// Users own devices 0..n_users-1 one to one; the remaining devices go to
/// random users. Throws ConfigError when n_devices < n_users.
Population build_population(const GeneratorConfig& config, Rng& rng);
Population build_population(const GeneratorConfig& config, std::uint64_t stream_seed);

/// Attributes a scenario forces on the transaction it rides on.
struct TransactionOverrides {
    std::optional<double> amount;
    double amount_scale = 1.0;
    std::optional<std::uint32_t> service;
    std::optional<Channel> channel;
    std::optional<std::uint32_t> region;
    bool attacker_device = false;
};

struct Injection {
    AnomalySignals signals;
    TransactionOverrides overrides;
};

/// Where an attack event sits: its chain position and the victim's habits.
struct ScenarioContext {
    std::uint32_t chain_position = 0;
    std::uint32_t home_region = 0;
    std::uint32_t home_zone = 0;
};

Injection inject_scenario(ScenarioKind kind, const ScenarioContext& ctx, const GeneratorConfig& config,
                          Rng& rng);

/// Interleaved benign and attack events for one run. Attack events arrive
/// with probability attack_probability each; consecutive attack events
/// continue the current campaign (same victim and kind) until its chain
/// length is used up.
class EventGenerator {
public:
    EventGenerator(GeneratorConfig config, std::uint64_t stream_seed);

    Event next();
    const Population& population() const { return population_; }
    const GeneratorConfig& config() const { return config_; }

private:
    struct Campaign {
        ScenarioKind kind = ScenarioKind::credential_compromise;
        std::uint32_t user = 0;
        std::uint32_t remaining = 0;
        std::uint32_t position = 0;
        std::uint32_t attacker_device = 0;
    };

    GeneratorConfig config_;
    Rng rng_;
    Population population_;
    std::optional<Campaign> campaign_;
    std::uint64_t time_index_ = 0;
    double txn_sigma_ = 0.0;
};

} // namespace ztbench
