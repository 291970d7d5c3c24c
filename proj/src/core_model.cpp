#include "ztbench/core_model.hpp"

#include "ztbench/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace ztbench {

namespace {

constexpr std::array<std::string_view, kChannelCount> kChannelNames{"web", "mobile", "api", "atm", "pos"};

constexpr std::array<std::string_view, kScenarioCount> kScenarioNames{
    "credential_compromise", "insider_lateral", "api_abuse",         "money_laundering",
    "session_hijack",        "card_theft",      "synthetic_identity"};

void require_unit(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " + std::to_string(v));
}

} // namespace

std::string_view to_string(Channel c) { return kChannelNames.at(static_cast<std::size_t>(c)); }

Channel parse_channel(std::string_view s) {
    for (std::size_t i = 0; i < kChannelNames.size(); ++i)
        if (kChannelNames[i] == s) return static_cast<Channel>(i);
    throw DataError("unknown channel '" + std::string(s) + "'");
}

std::string_view to_string(ScenarioKind k) { return kScenarioNames.at(static_cast<std::size_t>(k)); }

ScenarioKind parse_scenario(std::string_view s) {
    for (std::size_t i = 0; i < kScenarioNames.size(); ++i)
        if (kScenarioNames[i] == s) return static_cast<ScenarioKind>(i);
    throw DataError("unknown scenario '" + std::string(s) + "'");
}

// ── TrustWeights ─────────────────────────────────────────────────────────────

TrustWeights::TrustWeights(double identity, double device, double risk, double context)
    : identity_(identity), device_(device), risk_(risk), context_(context) {
    for (double w : {identity, device, risk, context})
        if (!std::isfinite(w) || w < 0.0) throw ConfigError("trust weights must be non-negative");
    if (std::abs(identity + device + risk + context - 1.0) > 1e-9)
        throw ConfigError("trust weights must sum to 1");
}

TrustWeights TrustWeights::normalized(double identity, double device, double risk, double context) {
    const double total = identity + device + risk + context;
    if (!(total > 0.0)) throw ConfigError("trust weights must have a positive sum");
    return {identity / total, device / total, risk / total, context / total};
}

void AdaptationParams::validate() const {
    for (double eta : {eta_identity, eta_device, eta_context})
        if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("adaptation rate eta must lie in (0,1]");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

// ── Trust model ──────────────────────────────────────────────────────────────

double clip(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite trust value");
    return std::min(1.0, std::max(0.0, x));
}

double g_map(double s) {
    require_unit(s, "anomaly score");
    return 1.0 - s;
}

double update_trust(double current, double anomaly, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("adaptation rate eta must lie in (0,1]");
    require_unit(current, "trust score");
    return clip((1.0 - eta) * current + eta * g_map(anomaly));
}

double composite_trust(const TrustWeights& w, double identity, double device, double txn_risk,
                       double context) {
    require_unit(identity, "identity score");
    require_unit(device, "device score");
    require_unit(txn_risk, "transaction risk");
    require_unit(context, "context score");
    const double theta = w.identity() * identity + w.device() * device + w.risk() * (1.0 - txn_risk) +
                         w.context() * context;
    // Rounding can push a weight-sum-1 combination a few ulps past 1.
    return std::min(1.0, std::max(0.0, theta));
}

// ── TrustState ───────────────────────────────────────────────────────────────

TrustState::TrustState(double prior) : prior_(prior) { require_unit(prior, "trust prior"); }

double TrustState::get(EntityId id) const {
    auto it = scores_.find(id);
    return it == scores_.end() ? prior_ : it->second;
}

void TrustState::set(EntityId id, double score) { scores_[id] = clip(score); }

} // namespace ztbench
