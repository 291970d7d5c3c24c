#include "ztbench/metrics.hpp"

#include "ztbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ztbench {

std::string_view to_string(Action a) {
    switch (a) {
        case Action::allow:   return "allow";
        case Action::step_up: return "step_up";
        case Action::block:   return "block";
    }
    return "unknown";
}

namespace {

void require_unit(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

// ── Metric primitives ────────────────────────────────────────────────────────

double tii(std::span<const ServiceCount> counts) {
    double valid = 0.0, total = 0.0;
    bool any = false;
    for (const auto& c : counts) {
        if (!(c.weight > 0.0)) throw ConfigError("service weight must be positive");
        if (c.n_valid > c.n_total) throw std::invalid_argument("n_valid exceeds n_total");
        valid += c.weight * static_cast<double>(c.n_valid);
        total += c.weight * static_cast<double>(c.n_total);
        any = any || c.n_total > 0;
    }
    if (!any) throw std::invalid_argument("no transactions");
    return valid / total;
}

double delta_identity(double i_start, double i_end, double epsilon) {
    require_unit(i_start, "window start score");
    require_unit(i_end, "window end score");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    return (i_start - i_end) / std::max(i_start, epsilon);
}

double ital(const TrustTrajectories& trajectories, std::span<const WindowAnchor> anchors,
            std::size_t window_len, double epsilon) {
    if (trajectories.empty()) throw std::invalid_argument("no trajectories");
    if (window_len < 2) throw ConfigError("ITAL window length must be at least 2");
    if (anchors.empty()) return 0.0;

    double sum = 0.0;
    for (const auto& anchor : anchors) {
        auto it = trajectories.find(anchor.user);
        if (it == trajectories.end()) throw std::invalid_argument("anchor user has no trajectory");
        const auto& traj = it->second;
        auto pos = std::lower_bound(traj.begin(), traj.end(), anchor.time_index,
                                    [](const TrustPoint& p, std::uint64_t t) { return p.time_index < t; });
        if (pos == traj.end() || pos->time_index != anchor.time_index)
            throw std::invalid_argument("anchor time not present in trajectory");
        const auto start = static_cast<std::size_t>(pos - traj.begin());
        const auto end = std::min(start + window_len - 1, traj.size() - 1);
        sum += delta_identity(traj[start].score, traj[end].score, epsilon);
    }
    return sum / static_cast<double>(anchors.size());
}

double sae(std::uint64_t total_incidents, std::uint64_t auto_handled) {
    if (auto_handled > total_incidents) throw std::invalid_argument("auto-handled incidents exceed total");
    return total_incidents == 0 ? 0.0 : static_cast<double>(auto_handled) / static_cast<double>(total_incidents);
}

double acf(std::uint64_t total_actions, std::uint64_t confirmed_correct, double mu) {
    if (confirmed_correct > total_actions) throw std::invalid_argument("confirmed actions exceed total");
    if (!(mu > 0.0)) throw ConfigError("ACF calibration mu must be positive");
    return total_actions == 0 ? 0.0
                              : mu * static_cast<double>(confirmed_correct) / static_cast<double>(total_actions);
}

void FtsWeights::validate() const {
    for (double w : {alpha, beta, gamma})
        if (!std::isfinite(w) || w < 0.0) throw ConfigError("FTS weights must be non-negative");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) throw ConfigError("FTS weights must sum to 1");
}

double fts(double loss, double exploit_prob, double exposure, const FtsWeights& w) {
    w.validate();
    require_unit(loss, "loss");
    require_unit(exploit_prob, "exploitation probability");
    require_unit(exposure, "exposure");
    return std::min(1.0, w.alpha * loss + w.beta * exploit_prob + w.gamma * exposure);
}

void validate_band_thresholds(std::span<const double> thresholds) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const double t = thresholds[i];
        if (!(t > 0.0 && t < 1.0)) throw ConfigError("band thresholds must lie in (0,1)");
        if (i > 0 && !(thresholds[i - 1] < t)) throw ConfigError("band thresholds must be strictly increasing");
    }
}

int risk_band(double fts_value, std::span<const double> thresholds) {
    validate_band_thresholds(thresholds);
    if (!std::isfinite(fts_value) || fts_value < 0.0) throw std::invalid_argument("FTS must be finite and >= 0");
    // Half-open [tau_{k-1}, tau_k): a value equal to tau_k belongs to band k+1.
    const auto above = std::upper_bound(thresholds.begin(), thresholds.end(), fts_value) - thresholds.begin();
    return static_cast<int>(above) + 1;
}

double trp(double volume, double mean_risk, double window_duration, double delta) {
    if (!(window_duration > 0.0)) throw std::invalid_argument("TRP window duration must be positive");
    if (volume < 0.0) throw std::invalid_argument("TRP volume must be non-negative");
    require_unit(mean_risk, "mean risk");
    return delta * volume * mean_risk / window_duration;
}

double ass(std::uint64_t zones_adaptive, std::uint64_t zones_total, double lambda_norm) {
    if (zones_total == 0) throw std::invalid_argument("zone count must be positive");
    if (zones_adaptive > zones_total) throw std::invalid_argument("adaptive zones exceed total zones");
    return lambda_norm * static_cast<double>(zones_adaptive) / static_cast<double>(zones_total);
}

ConfusionMetrics confusion_metrics(std::span<const DecisionRecord> records) {
    ConfusionMetrics m;
    for (const auto& r : records) {
        const bool flagged = r.is_enforcement();
        if (r.is_attack()) (flagged ? m.tp : m.fn)++;
        else (flagged ? m.fp : m.tn)++;
    }
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.recall = ratio(m.tp, m.tp + m.fn);
    m.fpr = ratio(m.fp, m.fp + m.tn);
    m.fnr = ratio(m.fn, m.fn + m.tp);
    if (m.precision && m.recall) {
        const double p = *m.precision, r = *m.recall;
        m.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    return m;
}

// ── RunMetrics ───────────────────────────────────────────────────────────────

const std::vector<std::string>& scalar_metric_names() {
    static const std::vector<std::string> names{"tii", "sae", "sae_star", "ital", "acf", "trp",
                                                "ass", "precision", "recall", "f1", "fpr", "fnr"};
    return names;
}

std::map<std::string, double> RunMetrics::scalars() const {
    std::map<std::string, double> out{{"tii", tii}, {"sae", sae}, {"sae_star", sae_star}, {"ital", ital},
                                      {"acf", acf}, {"trp", trp}, {"ass", ass}};
    auto put = [&](const char* name, const std::optional<double>& v) {
        if (v) out.emplace(name, *v);
    };
    put("precision", precision);
    put("recall", recall);
    put("f1", f1);
    put("fpr", fpr);
    put("fnr", fnr);
    return out;
}

// ── MetricsAccumulator ───────────────────────────────────────────────────────

MetricsAccumulator::MetricsAccumulator(MetricsParams params) : params_(std::move(params)) {
    if (params_.services.empty()) throw ConfigError("at least one service zone is required");
    if (params_.ital_window < 2) throw ConfigError("ITAL window length must be at least 2");
    service_counts_.resize(params_.services.size());
    for (std::size_t i = 0; i < params_.services.size(); ++i) service_counts_[i].weight = params_.services[i].weight;
    zone_adaptive_.assign(params_.services.size(), false);
}

void MetricsAccumulator::add(const DecisionRecord& r) {
    if (r.service >= service_counts_.size()) throw std::invalid_argument("decision references unknown service");
    ++events_;
    auto& sc = service_counts_[r.service];
    ++sc.n_total;
    if (r.is_valid_completion()) ++sc.n_valid;

    if (r.is_enforcement()) {
        zone_adaptive_[r.service] = true;
        if (r.automated) {
            ++auto_actions_;
            if (r.confirmed_correct.value_or(false)) ++confirmed_;
        }
    }

    const bool flagged = r.is_enforcement();
    if (r.is_attack()) {
        ++incidents_;
        if (r.is_auto_handled_incident()) ++auto_handled_;
        auto& so = per_scenario_[std::string(to_string(*r.scenario))];
        switch (r.action) {
            case Action::allow:   ++so.allowed; break;
            case Action::step_up: ++so.challenged; break;
            case Action::block:   ++so.blocked; break;
        }
        (flagged ? tp_ : fn_)++;
    } else {
        (flagged ? fp_ : tn_)++;
    }

    volume_ += r.amount;
    risk_sum_ += r.normalized_risk;

    // ITAL: advance this user's open windows by one trajectory point, then
    // open a new window if this event starts a run of attacks.
    auto& us = users_[r.user.index];
    for (auto& w : us.open) {
        w.last = r.identity_score;
        ++w.seen;
    }
    std::erase_if(us.open, [&](const OpenWindow& w) {
        if (w.seen < params_.ital_window) return false;
        ital_sum_ += delta_identity(w.start, w.last, params_.epsilon);
        ++ital_closed_;
        return true;
    });
    if (r.is_attack() && !us.last_was_attack) us.open.push_back({r.identity_score, r.identity_score, 1});
    us.last_was_attack = r.is_attack();
}

RunMetrics MetricsAccumulator::finish() const {
    RunMetrics m;
    m.events = events_;
    m.incidents = incidents_;
    m.tii = events_ ? tii(service_counts_) : 0.0;
    m.sae = sae(incidents_, auto_handled_);
    m.acf = acf(auto_actions_, confirmed_, params_.acf_mu);
    m.sae_star = sae_star(m.sae, m.acf);

    // Windows still open are truncated at the end of the run.
    double sum = ital_sum_;
    std::uint64_t count = ital_closed_;
    for (const auto& [user, us] : users_) {
        for (const auto& w : us.open) {
            sum += delta_identity(w.start, w.last, params_.epsilon);
            ++count;
        }
    }
    m.ital = count ? sum / static_cast<double>(count) : 0.0;

    if (events_) {
        m.trp = trp(volume_, risk_sum_ / static_cast<double>(events_), static_cast<double>(events_),
                    params_.trp_delta);
    }
    const auto zones = params_.adaptive_segmentation
                           ? static_cast<std::uint64_t>(std::count(zone_adaptive_.begin(), zone_adaptive_.end(), true))
                           : 0;
    m.ass = ass(zones, params_.services.size(), params_.ass_lambda);

    m.precision = ratio(tp_, tp_ + fp_);
    m.recall = ratio(tp_, tp_ + fn_);
    m.fpr = ratio(fp_, fp_ + tn_);
    m.fnr = ratio(fn_, fn_ + tp_);
    if (m.precision && m.recall) {
        const double p = *m.precision, r = *m.recall;
        m.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }

    for (std::size_t i = 0; i < service_counts_.size(); ++i) {
        const auto& sc = service_counts_[i];
        if (sc.n_total > 0)
            m.per_service_tii[params_.services[i].name] =
                static_cast<double>(sc.n_valid) / static_cast<double>(sc.n_total);
    }
    m.per_scenario = per_scenario_;
    return m;
}

} // namespace ztbench
