#pragma once

#include "ztbench/core_model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ztbench {

enum class Action : std::uint8_t { allow, step_up, block };

std::string_view to_string(Action a);

/// One PDP outcome together with the event attributes the scorecard needs.
struct DecisionRecord {
    std::uint64_t time_index = 0;
    EntityId user = user_id(0);
    EntityId device = device_id(0);
    std::uint32_t service = 0;
    std::optional<ScenarioKind> scenario;
    double amount = 0.0;
    double normalized_risk = 0.0;

    Action action = Action::allow;
    double theta = 1.0;
    double fts = 0.0;
    int band = 1;
    bool automated = false;
    // Set for every automated enforcement (step-up or block).
    std::optional<bool> confirmed_correct;
    // Set whenever a step-up challenge was issued.
    std::optional<bool> challenge_passed;
    // Identity trust read by the PDP before the event's update.
    double identity_score = 0.0;

    bool is_attack() const { return scenario.has_value(); }
    bool is_enforcement() const { return action != Action::allow; }

    /// Legitimate transaction that completed: allowed outright, or stepped up
    /// and the challenge passed.
    bool is_valid_completion() const {
        if (is_attack()) return false;
        return action == Action::allow || (action == Action::step_up && challenge_passed.value_or(true));
    }

    /// Attack stopped by an autonomous action: blocked, or stepped up and the
    /// attacker failed the challenge.
    bool is_auto_handled_incident() const {
        if (!is_attack() || !automated) return false;
        return action == Action::block || (action == Action::step_up && !challenge_passed.value_or(false));
    }

    bool operator==(const DecisionRecord&) const = default;
};

// ── Metric primitives ────────────────────────────────────────────────────────

struct ServiceCount {
    double weight = 1.0;
    std::uint64_t n_valid = 0;
    std::uint64_t n_total = 0;
};

/// Transactional Integrity Index: sum(w*valid) / sum(w*total).
double tii(std::span<const ServiceCount> counts);

/// Relative identity-trust drop over a window, (start - end) / max(start, eps).
double delta_identity(double i_start, double i_end, double epsilon);

struct TrustPoint {
    std::uint64_t time_index = 0;
    double score = 0.0;
};

/// Per-user identity score at each of the user's events, in time order.
using TrustTrajectories = std::map<std::uint32_t, std::vector<TrustPoint>>;

struct WindowAnchor {
    std::uint32_t user = 0;
    std::uint64_t time_index = 0;
};

/// Identity Trust Adaptation Level: mean delta_identity over windows of
/// window_len points of the anchor user's trajectory, starting at the anchor
/// and truncated at the trajectory's end. Returns 0 when there are no anchors.
double ital(const TrustTrajectories& trajectories, std::span<const WindowAnchor> anchors,
            std::size_t window_len, double epsilon);

/// Security Automation Efficiency. 0 when there were no incidents.
double sae(std::uint64_t total_incidents, std::uint64_t auto_handled);

/// Automation Confidence Factor, mu * confirmed / total. 0 when nothing ran.
double acf(std::uint64_t total_actions, std::uint64_t confirmed_correct, double mu = 1.0);

inline double sae_star(double sae_value, double acf_value) { return sae_value * acf_value; }

struct FtsWeights {
    double alpha = 0.5;
    double beta = 0.3;
    double gamma = 0.2;

    void validate() const;
};

/// Financial Threat Score alpha*L + beta*P + gamma*E over normalized inputs.
double fts(double loss, double exploit_prob, double exposure, const FtsWeights& w = {});

/// Band k such that tau_{k-1} <= fts < tau_k, with tau_0 = 0 and tau_K = +inf.
int risk_band(double fts_value, std::span<const double> thresholds);
void validate_band_thresholds(std::span<const double> thresholds);

/// Transactional Risk Pressure, delta * V * R / T.
double trp(double volume, double mean_risk, double window_duration, double delta = 1.0);

/// Adaptive Segmentation Strength, lambda * Zc / Zt.
double ass(std::uint64_t zones_adaptive, std::uint64_t zones_total, double lambda_norm = 1.0);

struct ConfusionMetrics {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> precision, recall, f1, fpr, fnr;
};

/// Positive = flagged (step-up or block); ground truth = attack annotation.
/// Ratios with a zero denominator are left empty.
ConfusionMetrics confusion_metrics(std::span<const DecisionRecord> records);

// ── Run scorecard ────────────────────────────────────────────────────────────

struct ScenarioOutcome {
    std::uint64_t allowed = 0;
    std::uint64_t challenged = 0;
    std::uint64_t blocked = 0;

    bool operator==(const ScenarioOutcome&) const = default;
};

struct RunMetrics {
    double tii = 0.0;
    double sae = 0.0;
    double sae_star = 0.0;
    double ital = 0.0;
    double acf = 0.0;
    double trp = 0.0;
    double ass = 0.0;
    std::optional<double> precision, recall, f1, fpr, fnr;
    std::map<std::string, double> per_service_tii;
    std::map<std::string, ScenarioOutcome> per_scenario;
    std::uint64_t events = 0;
    std::uint64_t incidents = 0;

    /// Headline and auxiliary scalar metrics by name; empty optionals skipped.
    std::map<std::string, double> scalars() const;

    bool operator==(const RunMetrics&) const = default;
};

/// Names of the scalar metrics in reporting order.
const std::vector<std::string>& scalar_metric_names();

struct ServiceZone {
    std::string name;
    double weight = 1.0;
};

struct MetricsParams {
    std::vector<ServiceZone> services;
    std::size_t ital_window = 10;
    double epsilon = 1e-6;
    double acf_mu = 1.0;
    double trp_delta = 1.0;
    double ass_lambda = 1.0;
    // Whether the engine enforces adaptive (context-driven) zone policies.
    bool adaptive_segmentation = false;
};

/// Streaming scorecard. Feed decisions in time order with add(); finish()
/// returns the run's metrics without revisiting the log. ITAL windows are
/// anchored at the onset of each run of consecutive attack events in a
/// user's trajectory.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(MetricsParams params);

    void add(const DecisionRecord& r);
    RunMetrics finish() const;

private:
    struct OpenWindow {
        double start = 0.0;
        double last = 0.0;
        std::size_t seen = 0;
    };
    struct UserState {
        bool last_was_attack = false;
        std::vector<OpenWindow> open;
    };

    MetricsParams params_;
    std::vector<ServiceCount> service_counts_;
    std::vector<bool> zone_adaptive_;
    std::uint64_t events_ = 0, incidents_ = 0, auto_handled_ = 0;
    std::uint64_t auto_actions_ = 0, confirmed_ = 0;
    std::uint64_t tp_ = 0, fp_ = 0, fn_ = 0, tn_ = 0;
    double volume_ = 0.0, risk_sum_ = 0.0;
    double ital_sum_ = 0.0;
    std::uint64_t ital_closed_ = 0;
    std::unordered_map<std::uint32_t, UserState> users_;
    std::map<std::string, ScenarioOutcome> per_scenario_;
};

} // namespace ztbench
