#include "ztbench/policy.hpp"

#include "ztbench/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ztbench {

// ── Configuration ────────────────────────────────────────────────────────────

void PolicyConfig::validate() const {
    auto check_pair = [](double block, double step_up) {
        if (!(0.0 <= block && block < step_up && step_up <= 1.0))
            throw ConfigError("thresholds must satisfy 0 <= theta_block < theta_stepup <= 1");
    };
    check_pair(theta_block, theta_stepup);
    for (const auto& [service, pair] : service_thresholds) check_pair(pair.block, pair.step_up);
    adaptation.validate();
    fts_weights.validate();
    validate_band_thresholds(band_thresholds);
    if (band_thresholds.empty()) throw ConfigError("at least one band threshold is required");
    if (!(amount_cap > 0.0)) throw ConfigError("amount_cap must be positive");
    if (!(acf_autonomy_floor >= 0.0 && acf_autonomy_floor <= 1.0))
        throw ConfigError("acf_autonomy_floor must lie in [0,1]");
    if (!(initial_trust >= 0.0 && initial_trust <= 1.0)) throw ConfigError("initial_trust must lie in [0,1]");
    if (service_weights.empty()) throw ConfigError("service_weights must not be empty");
    for (double w : service_weights)
        if (!(w > 0.0)) throw ConfigError("service weights must be positive");
}

ThresholdPair PolicyConfig::thresholds_for(std::uint32_t service) const {
    if (auto it = service_thresholds.find(service); it != service_thresholds.end()) return it->second;
    return {theta_block, theta_stepup};
}

void BaselineRules::validate() const {
    if (!(amount_limit > 0.0)) throw ConfigError("baseline amount_limit must be positive");
}

// ── Runbooks ─────────────────────────────────────────────────────────────────

std::string_view to_string(RunbookStep s) {
    switch (s) {
        case RunbookStep::log_only:            return "log_only";
        case RunbookStep::enhanced_monitoring: return "enhanced_monitoring";
        case RunbookStep::step_up_auth:        return "step_up_auth";
        case RunbookStep::transaction_hold:    return "transaction_hold";
        case RunbookStep::account_lock:        return "account_lock";
        case RunbookStep::session_terminate:   return "session_terminate";
        case RunbookStep::regulatory_notify:   return "regulatory_notify";
        case RunbookStep::ticket_create:       return "ticket_create";
    }
    return "unknown";
}

RunbookAction select_runbook(int band, int band_count) {
    if (band_count < 1) throw ConfigError("band count must be positive");
    if (band < 1 || band > band_count)
        throw std::out_of_range("risk band " + std::to_string(band) + " outside [1," + std::to_string(band_count) +
                                "]");
    const int tier = 1 + (band - 1) * 4 / band_count;
    RunbookAction r;
    r.band = band;
    switch (tier) {
        case 1: r.actions = {RunbookStep::log_only}; break;
        case 2: r.actions = {RunbookStep::enhanced_monitoring, RunbookStep::step_up_auth}; break;
        case 3: r.actions = {RunbookStep::transaction_hold, RunbookStep::session_terminate}; break;
        default:
            r.actions = {RunbookStep::account_lock, RunbookStep::regulatory_notify, RunbookStep::ticket_create};
            break;
    }
    return r;
}

bool autonomy_gate(double running_acf, int band, double floor) { return band <= 2 || running_acf >= floor; }

void AutomationLedger::record(bool confirmed) {
    ++total_;
    if (confirmed) ++confirmed_;
}

// ── Decisions ────────────────────────────────────────────────────────────────

namespace {

DecisionRecord record_for(const Event& e) {
    DecisionRecord r;
    r.time_index = e.time_index;
    r.user = e.user;
    r.device = e.device;
    r.service = e.transaction.service.index;
    r.scenario = e.attack;
    r.amount = e.transaction.amount;
    r.normalized_risk = e.transaction.normalized_risk;
    return r;
}

Action escalate(Action a) { return a == Action::allow ? Action::step_up : Action::block; }

} // namespace

DecisionRecord baseline_decide(const Event& event, const BaselineRules& rules) {
    DecisionRecord r = record_for(event);
    const auto& txn = event.transaction;
    if (txn.amount > rules.amount_limit || rules.blocked_regions.contains(txn.region)) {
        r.action = Action::block;
        r.automated = true;
        r.confirmed_correct = event.is_attack();
    } else if (std::any_of(rules.stepup_rules.begin(), rules.stepup_rules.end(),
                           [&](const StepUpRule& rule) { return rule.matches(txn); })) {
        r.action = Action::step_up;
    }
    return r;
}

Decision securebank_decide(const Event& event, TrustState& trust, const PolicyConfig& config,
                           AutomationLedger& ledger) {
    const double identity = trust.get(event.user);
    const double device = trust.get(event.device);
    const double context = trust.get(event.context);
    const auto& txn = event.transaction;

    DecisionRecord r = record_for(event);
    r.identity_score = identity;
    r.theta = composite_trust(config.weights, identity, device, txn.normalized_risk, context);

    if (txn.service.index >= config.service_weights.size())
        throw ConfigError("event references a service without a criticality weight");
    const double max_weight = *std::max_element(config.service_weights.begin(), config.service_weights.end());
    const double loss = std::min(txn.amount / config.amount_cap, 1.0);
    const double exposure = config.service_weights[txn.service.index] / max_weight;
    r.fts = fts(loss, event.anomaly.max(), exposure, config.fts_weights);
    const int k = config.band_count();
    r.band = risk_band(r.fts, config.band_thresholds);

    const auto th = config.thresholds_for(txn.service.index);
    r.action = r.theta < th.block ? Action::block : r.theta < th.step_up ? Action::step_up : Action::allow;
    if (r.band == k) r.action = Action::block;
    else if (r.band >= 3) r.action = escalate(r.action);

    const auto& a = config.adaptation;
    trust.set(event.user, update_trust(identity, event.anomaly.user, a.eta_identity));
    trust.set(event.device, update_trust(device, event.anomaly.device, a.eta_device));
    trust.set(event.context, update_trust(context, event.anomaly.context, a.eta_context));

    RunbookAction runbook = select_runbook(r.band, k);
    Decision d{std::move(r), std::move(runbook)};
    d.record.automated = autonomy_gate(ledger.running_acf(), d.record.band, config.acf_autonomy_floor);
    d.runbook.autonomous = d.record.automated;
    if (d.record.is_enforcement()) {
        // Step-ups on legitimate users are uncontested friction; only blocks
        // of legitimate transactions count against confidence.
        const bool correct = event.is_attack() || d.record.action == Action::step_up;
        if (d.record.automated) d.record.confirmed_correct = correct;
        ledger.record(correct);
    }
    return d;
}

// ── Engines ──────────────────────────────────────────────────────────────────

BaselineEngine::BaselineEngine(BaselineRules rules, double initial_trust)
    : rules_(std::move(rules)), trust_(initial_trust) {
    rules_.validate();
}

DecisionRecord BaselineEngine::decide(const Event& event) const {
    DecisionRecord r = baseline_decide(event, rules_);
    r.identity_score = trust_.get(event.user);
    return r;
}

SecureBankEngine::SecureBankEngine(PolicyConfig config) : config_(std::move(config)), trust_(config_.initial_trust) {
    config_.validate();
}

} // namespace ztbench
