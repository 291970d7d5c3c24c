#pragma once

#include "ztbench/core_model.hpp"
#include "ztbench/metrics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace ztbench {

struct ThresholdPair {
    double block = 0.40;
    double step_up = 0.60;
};

struct PolicyConfig {
    double theta_block = 0.40;
    double theta_stepup = 0.60;
    TrustWeights weights;
    AdaptationParams adaptation;
    FtsWeights fts_weights;
    std::vector<double> band_thresholds{0.25, 0.50, 0.75};
    // Currency amount at which the normalized loss term saturates.
    double amount_cap = 1000.0;
    double acf_autonomy_floor = 0.90;
    double initial_trust = 0.80;
    // Criticality weight per service index; exposure E = w_s / max w.
    std::vector<double> service_weights{1.0};
    // Optional per-service override of the global threshold pair.
    std::map<std::uint32_t, ThresholdPair> service_thresholds;

    void validate() const;
    int band_count() const { return static_cast<int>(band_thresholds.size()) + 1; }
    ThresholdPair thresholds_for(std::uint32_t service) const;
};

struct StepUpRule {
    std::optional<Channel> channel;
    std::optional<std::uint32_t> region;

    bool matches(const Transaction& t) const {
        return (!channel || *channel == t.channel) && (!region || *region == t.region);
    }
};

struct BaselineRules {
    double amount_limit = 25000.0;
    std::set<std::uint32_t> blocked_regions{14};
    std::vector<StepUpRule> stepup_rules;

    void validate() const;
};

enum class RunbookStep : std::uint8_t {
    log_only,
    enhanced_monitoring,
    step_up_auth,
    transaction_hold,
    account_lock,
    session_terminate,
    regulatory_notify,
    ticket_create,
};

std::string_view to_string(RunbookStep s);

struct RunbookAction {
    int band = 1;
    std::vector<RunbookStep> actions;
    bool autonomous = true;
};

/// Deterministic band-to-runbook template. With K = 4 the bands map one to one
/// onto the four response tiers; other K are spread evenly across the tiers.
RunbookAction select_runbook(int band, int band_count = 4);

/// True when an action may run without human validation: low bands always,
/// high bands only while the running confidence factor meets the floor.
bool autonomy_gate(double running_acf, int band, double floor);

/// Running confidence in enforcement decisions, fed by analyst confirmation of
/// every step-up or block (autonomous or human-validated). Reads 1.0 until
/// the first decision is confirmed or contested.
class AutomationLedger {
public:
    void record(bool confirmed);
    double running_acf() const {
        return total_ == 0 ? 1.0 : static_cast<double>(confirmed_) / static_cast<double>(total_);
    }
    std::uint64_t total() const { return total_; }

private:
    std::uint64_t total_ = 0;
    std::uint64_t confirmed_ = 0;
};

struct Decision {
    DecisionRecord record;
    RunbookAction runbook;
};

/// Static rule baseline: block on amount or region rules, step up on matching
/// channel/region rules, otherwise allow. Never reads or writes trust;
/// theta, fts and band carry neutral values since nothing is scored.
DecisionRecord baseline_decide(const Event& event, const BaselineRules& rules);

/// Adaptive PDP. Reads I, D, C for the event's entities, scores theta and the
/// FTS band, picks the action, then applies the event's anomaly signals to
/// the trust state.
Decision securebank_decide(const Event& event, TrustState& trust, const PolicyConfig& config,
                           AutomationLedger& ledger);

// ── Engines ──────────────────────────────────────────────────────────────────

class BaselineEngine {
public:
    BaselineEngine(BaselineRules rules, double initial_trust);

    DecisionRecord decide(const Event& event) const;
    const TrustState& trust() const { return trust_; }

private:
    BaselineRules rules_;
    TrustState trust_;
};

class SecureBankEngine {
public:
    explicit SecureBankEngine(PolicyConfig config);

    Decision decide(const Event& event) { return securebank_decide(event, trust_, config_, ledger_); }
    const TrustState& trust() const { return trust_; }
    const PolicyConfig& config() const { return config_; }

private:
    PolicyConfig config_;
    TrustState trust_;
    AutomationLedger ledger_;
};

} // namespace ztbench
