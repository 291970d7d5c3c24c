#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace ztbench {

// ── Entities ─────────────────────────────────────────────────────────────────

enum class EntityKind : std::uint8_t { user, device, context, service };

struct EntityId {
    EntityKind kind = EntityKind::user;
    std::uint32_t index = 0;

    auto operator<=>(const EntityId&) const = default;
};

constexpr EntityId user_id(std::uint32_t i) { return {EntityKind::user, i}; }
constexpr EntityId device_id(std::uint32_t i) { return {EntityKind::device, i}; }
constexpr EntityId context_id(std::uint32_t i) { return {EntityKind::context, i}; }
constexpr EntityId service_id(std::uint32_t i) { return {EntityKind::service, i}; }

struct EntityIdHash {
    std::size_t operator()(const EntityId& id) const noexcept {
        return std::hash<std::uint64_t>{}((std::uint64_t{static_cast<std::uint8_t>(id.kind)} << 32) | id.index);
    }
};

enum class Channel : std::uint8_t { web, mobile, api, atm, pos };
inline constexpr std::size_t kChannelCount = 5;

std::string_view to_string(Channel c);
Channel parse_channel(std::string_view s);

enum class ScenarioKind : std::uint8_t {
    credential_compromise,
    insider_lateral,
    api_abuse,
    money_laundering,
    session_hijack,
    card_theft,
    synthetic_identity,
};
inline constexpr std::size_t kScenarioCount = 7;
// The first five kinds make up the simulated threat mix.
inline constexpr std::size_t kSimulatedScenarioCount = 5;

std::string_view to_string(ScenarioKind k);
ScenarioKind parse_scenario(std::string_view s);

// ── Event ────────────────────────────────────────────────────────────────────

struct Transaction {
    std::uint64_t id = 0;
    double amount = 0.0;
    EntityId service = service_id(0);
    Channel channel = Channel::web;
    std::uint32_t region = 0;
    double normalized_risk = 0.0;
};

// Per-entity anomaly intensities; ~0 benign, ~1 strongly anomalous.
struct AnomalySignals {
    double user = 0.0;
    double device = 0.0;
    double context = 0.0;

    double max() const { return std::max(user, std::max(device, context)); }
};

struct Event {
    std::uint64_t time_index = 0;
    EntityId user = user_id(0);
    EntityId device = device_id(0);
    EntityId context = context_id(0);
    Transaction transaction;
    AnomalySignals anomaly;
    std::optional<ScenarioKind> attack;

    bool is_attack() const { return attack.has_value(); }
};

// ── Trust parameters ─────────────────────────────────────────────────────────

/// Weights of the composite trust score. Validated on construction: all
/// non-negative and summing to 1 within 1e-9.
class TrustWeights {
public:
    TrustWeights() : TrustWeights(0.30, 0.25, 0.25, 0.20) {}
    TrustWeights(double identity, double device, double risk, double context);

    /// Scales the weights to sum 1. Useful when tuning relative importance.
    static TrustWeights normalized(double identity, double device, double risk, double context);

    double identity() const { return identity_; }
    double device() const { return device_; }
    double risk() const { return risk_; }
    double context() const { return context_; }

private:
    double identity_, device_, risk_, context_;
};

struct AdaptationParams {
    double eta_identity = 0.15;
    double eta_device = 0.10;
    double eta_context = 0.10;
    double epsilon = 1e-6;

    void validate() const;
};

// ── Trust model ──────────────────────────────────────────────────────────────

/// Saturates to [0, 1]. Throws on NaN or infinity ("non-finite trust value").
double clip(double x);

/// Anomaly-to-trust target map, 1 - s.
double g_map(double s);

/// One exponential-smoothing step toward g(anomaly):
/// clip((1 - eta) * current + eta * (1 - anomaly)).
double update_trust(double current, double anomaly, double eta);

/// Weighted linear combination with the risk term inverted:
/// w_I*I + w_D*D + w_R*(1 - R) + w_C*C.
double composite_trust(const TrustWeights& w, double identity, double device, double txn_risk,
                       double context);

/// Per-entity trust scores for one simulation run. Entities not yet seen read
/// as the prior; every write is clipped so stored scores stay in [0, 1].
class TrustState {
public:
    explicit TrustState(double prior = 0.8);

    double get(EntityId id) const;
    void set(EntityId id, double score);
    bool contains(EntityId id) const { return scores_.contains(id); }
    std::size_t size() const { return scores_.size(); }
    double prior() const { return prior_; }
    void reset() { scores_.clear(); }

    bool operator==(const TrustState&) const = default;

private:
    double prior_;
    std::unordered_map<EntityId, double, EntityIdHash> scores_;
};

} // namespace ztbench
