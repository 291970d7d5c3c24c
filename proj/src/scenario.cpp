#include "ztbench/scenario.hpp"

#include "ztbench/errors.hpp"

#include <cmath>
#include <numeric>

namespace ztbench {

namespace {

constexpr std::array<double, kChannelCount> kChannelRisk{0.3, 0.2, 0.6, 0.4, 0.3};
constexpr std::array<double, kRegionCount> kRegionRisk{0.10, 0.12, 0.15, 0.10, 0.20, 0.18, 0.25, 0.22,
                                                       0.30, 0.28, 0.60, 0.70, 0.80, 0.90, 0.95};

void require_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0,1]");
}

void require_shape(const BetaShape& s, const char* what) {
    if (!(s.a > 0.0 && s.b > 0.0 && std::isfinite(s.a) && std::isfinite(s.b)))
        throw ConfigError(std::string(what) + " Beta shapes must be positive");
}

double draw(Rng& rng, const BetaShape& s) { return rng.beta(s.a, s.b); }

double round_cents(double amount) { return std::max(0.01, std::round(amount * 100.0) / 100.0); }

} // namespace

double channel_risk(Channel c) { return kChannelRisk.at(static_cast<std::size_t>(c)); }

double region_risk(std::uint32_t region) {
    if (region >= kRegionCount) throw DataError("region " + std::to_string(region) + " out of range");
    return kRegionRisk[region];
}

double normalized_risk(double amount, Channel channel, std::uint32_t region, double amount_cap) {
    if (!(amount >= 0.0)) throw DataError("amount must be non-negative");
    if (!(amount_cap > 0.0)) throw ConfigError("amount_cap must be positive");
    return clip(0.5 * std::min(amount / amount_cap, 1.0) + 0.3 * channel_risk(channel) + 0.2 * region_risk(region));
}

// ── GeneratorConfig ──────────────────────────────────────────────────────────

void GeneratorConfig::validate() const {
    if (n_users == 0) throw ConfigError("n_users must be positive");
    if (n_devices < n_users) throw ConfigError("n_devices must be at least n_users (each user needs a device)");
    if (n_events == 0) throw ConfigError("n_events must be positive");
    require_prob(attack_probability, "attack_probability");

    double mix = 0.0;
    for (double p : scenario_mix) {
        if (!(p >= 0.0)) throw ConfigError("scenario_mix entries must be non-negative");
        mix += p;
    }
    if (std::abs(mix - 1.0) > 1e-9) throw ConfigError("scenario_mix must sum to 1");

    if (service_zones.empty()) throw ConfigError("at least one service zone is required");
    for (const auto& z : service_zones)
        if (!(z.weight > 0.0)) throw ConfigError("service zone weight must be positive");
    if (zone_traffic.size() != service_zones.size())
        throw ConfigError("zone_traffic must have one entry per service zone");
    double traffic = 0.0;
    for (double p : zone_traffic) {
        if (!(p >= 0.0)) throw ConfigError("zone_traffic entries must be non-negative");
        traffic += p;
    }
    if (!(traffic > 0.0)) throw ConfigError("zone_traffic must have a positive sum");

    require_shape(benign_anomaly, "benign_anomaly");
    require_shape(attack_secondary, "attack_secondary");
    for (const auto& s : attack_anomaly) require_shape(s, "attack_anomaly");
    for (const auto& c : chain_length)
        if (c.min == 0 || c.min > c.max) throw ConfigError("chain_length needs 1 <= min <= max");

    if (!(amount_median > 0.0) || !(amount_mean > amount_median))
        throw ConfigError("amount model needs 0 < median < mean");
    if (!(user_spend_sigma >= 0.0 && user_spend_sigma < log_sigma()))
        throw ConfigError("user_spend_sigma must lie in [0, log-amount sigma)");
    if (!(amount_cap > 0.0)) throw ConfigError("amount_cap must be positive");

    require_prob(home_region_prob, "home_region_prob");
    require_prob(preferred_channel_prob, "preferred_channel_prob");
    require_prob(home_zone_prob, "home_zone_prob");
    require_prob(hostile_region_prob, "hostile_region_prob");
    if (home_regions == 0 || home_regions >= roaming_regions || roaming_regions >= kRegionCount)
        throw ConfigError("regions need 0 < home_regions < roaming_regions < 15");
}

double GeneratorConfig::log_mu() const { return std::log(amount_median); }

double GeneratorConfig::log_sigma() const { return std::sqrt(2.0 * std::log(amount_mean / amount_median)); }

// ── Population ───────────────────────────────────────────────────────────────

Population build_population(const GeneratorConfig& config, Rng& rng) {
    if (config.n_users == 0) throw ConfigError("n_users must be positive");
    if (config.n_devices < config.n_users)
        throw ConfigError("n_devices must be at least n_users (each user needs a device)");

    Population pop;
    pop.users.resize(config.n_users);
    pop.device_owner.resize(config.n_devices);
    for (std::uint32_t d = 0; d < config.n_devices; ++d) {
        const auto owner = d < config.n_users ? d : static_cast<std::uint32_t>(rng.below(config.n_users));
        pop.device_owner[d] = owner;
        pop.users[owner].devices.push_back(d);
    }
    for (auto& u : pop.users) {
        u.home_region = static_cast<std::uint32_t>(rng.below(config.home_regions));
        u.home_zone = static_cast<std::uint32_t>(rng.categorical(config.zone_traffic));
        u.preferred_channel = static_cast<Channel>(rng.below(kChannelCount));
        u.spend_offset = rng.normal(0.0, config.user_spend_sigma);
    }
    return pop;
}

Population build_population(const GeneratorConfig& config, std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    return build_population(config, rng);
}

// ── Scenarios ────────────────────────────────────────────────────────────────

Injection inject_scenario(ScenarioKind kind, const ScenarioContext& ctx, const GeneratorConfig& config,
                          Rng& rng) {
    Injection inj;
    auto& s = inj.signals;
    auto& o = inj.overrides;
    s.user = draw(rng, config.attack_secondary);
    s.device = draw(rng, config.attack_secondary);
    s.context = draw(rng, config.attack_secondary);
    const auto& primary = config.attack_anomaly[static_cast<std::size_t>(kind)];
    const double cap = config.amount_cap;
    const auto zones = static_cast<std::uint32_t>(config.service_zones.size());

    switch (kind) {
        case ScenarioKind::credential_compromise:
            s.user = draw(rng, primary);
            // Foreign origin: a travel-only region, occasionally the hostile one.
            o.region = rng.bernoulli(config.hostile_region_prob)
                           ? kRegionCount - 1
                           : static_cast<std::uint32_t>(rng.between(config.home_regions, config.roaming_regions - 1));
            o.amount = cap * rng.uniform(0.5, 3.0);
            break;
        case ScenarioKind::insider_lateral:
            s.context = draw(rng, primary);
            if (zones > 1)
                o.service = (ctx.home_zone + 1 + static_cast<std::uint32_t>(rng.below(zones - 1))) % zones;
            o.channel = Channel::web;
            o.amount_scale = 4.0;
            break;
        case ScenarioKind::api_abuse:
            s.context = draw(rng, primary);
            o.channel = Channel::api;
            o.amount = rng.uniform(1.0, 50.0);
            break;
        case ScenarioKind::money_laundering: {
            // Suspicion builds along the chain of small transfers.
            const double pos = static_cast<double>(ctx.chain_position);
            s.user = rng.beta(std::min(3.0 + pos, 6.0), std::max(3.0 - 0.25 * pos, 2.0));
            o.amount = cap * rng.uniform(0.02, 0.099);
            o.service = 0;
            break;
        }
        case ScenarioKind::session_hijack:
            s.device = draw(rng, primary);
            o.attacker_device = true;
            o.region = (ctx.home_region + 1 + static_cast<std::uint32_t>(rng.below(kRegionCount - 1))) % kRegionCount;
            o.amount_scale = 5.0;
            break;
        case ScenarioKind::card_theft:
            s.device = draw(rng, primary);
            o.channel = rng.bernoulli(0.5) ? Channel::pos : Channel::atm;
            o.amount_scale = 3.0;
            break;
        case ScenarioKind::synthetic_identity:
            s.user = draw(rng, primary);
            o.amount = cap * rng.uniform(0.2, 1.0);
            break;
    }
    return inj;
}

// ── EventGenerator ───────────────────────────────────────────────────────────

EventGenerator::EventGenerator(GeneratorConfig config, std::uint64_t stream_seed)
    : config_(std::move(config)), rng_(stream_seed) {
    config_.validate();
    population_ = build_population(config_, rng_);
    const double sigma = config_.log_sigma();
    txn_sigma_ = std::sqrt(sigma * sigma - config_.user_spend_sigma * config_.user_spend_sigma);
}

Event EventGenerator::next() {
    Event e;
    e.time_index = time_index_++;
    const auto n_users = config_.n_users;

    std::uint32_t u;
    std::uint32_t position = 0;
    const bool attack = rng_.bernoulli(config_.attack_probability);
    if (attack) {
        if (!campaign_ || campaign_->remaining == 0) {
            Campaign c;
            c.kind = static_cast<ScenarioKind>(rng_.categorical(config_.scenario_mix));
            c.user = static_cast<std::uint32_t>(rng_.below(n_users));
            const auto& len = config_.chain_length[static_cast<std::size_t>(c.kind)];
            c.remaining = static_cast<std::uint32_t>(rng_.between(len.min, len.max));
            const auto& owned = population_.users[c.user].devices;
            if (owned.size() < config_.n_devices) {
                do {
                    c.attacker_device = static_cast<std::uint32_t>(rng_.below(config_.n_devices));
                } while (population_.device_owner[c.attacker_device] == c.user);
            } else {
                c.attacker_device = owned.front();
            }
            campaign_ = c;
        }
        u = campaign_->user;
        position = campaign_->position++;
        --campaign_->remaining;
        e.attack = campaign_->kind;
    } else {
        u = static_cast<std::uint32_t>(rng_.below(n_users));
    }

    const UserProfile& profile = population_.users[u];
    std::uint32_t device = profile.devices[rng_.below(profile.devices.size())];
    std::uint32_t region = rng_.bernoulli(config_.home_region_prob)
                               ? profile.home_region
                               : static_cast<std::uint32_t>(rng_.below(config_.roaming_regions));
    Channel channel = rng_.bernoulli(config_.preferred_channel_prob) ? profile.preferred_channel
                                                                      : static_cast<Channel>(rng_.below(kChannelCount));
    std::uint32_t service = rng_.bernoulli(config_.home_zone_prob)
                                ? profile.home_zone
                                : static_cast<std::uint32_t>(rng_.below(config_.service_zones.size()));
    double amount = std::exp(config_.log_mu() + profile.spend_offset + txn_sigma_ * rng_.normal());

    e.anomaly.user = draw(rng_, config_.benign_anomaly);
    e.anomaly.device = draw(rng_, config_.benign_anomaly);
    e.anomaly.context = draw(rng_, config_.benign_anomaly);

    if (attack) {
        ScenarioContext ctx{position, profile.home_region, profile.home_zone};
        Injection inj = inject_scenario(*e.attack, ctx, config_, rng_);
        e.anomaly = inj.signals;
        const auto& o = inj.overrides;
        amount = o.amount.value_or(amount) * o.amount_scale;
        service = o.service.value_or(service);
        channel = o.channel.value_or(channel);
        region = o.region.value_or(region);
        if (o.attacker_device) device = campaign_->attacker_device;
    }

    e.user = user_id(u);
    e.device = device_id(device);
    e.context = context_of(region, channel);
    auto& t = e.transaction;
    t.id = e.time_index + 1;
    t.amount = round_cents(amount);
    t.service = service_id(service);
    t.channel = channel;
    t.region = region;
    t.normalized_risk = normalized_risk(t.amount, channel, region, config_.amount_cap);
    return e;
}

} // namespace ztbench
