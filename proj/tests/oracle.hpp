#pragma once

// Brute-force recomputation of the run scorecard straight from a decision
// log. Shares no code with MetricsAccumulator: every quantity is rebuilt from
// its definition with plain loops over the full log.

#include "ztbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ztbench::oracle {

struct Scorecard {
    std::uint64_t events = 0;
    std::uint64_t incidents = 0;
    std::uint64_t auto_handled = 0;
    std::uint64_t auto_actions = 0;
    std::uint64_t confirmed = 0;
    std::uint64_t ital_windows = 0;
    double tii = 0.0;
    double sae = 0.0;
    double sae_star = 0.0;
    double ital = 0.0;
    double acf = 0.0;
};

inline Scorecard recompute(std::span<const DecisionRecord> log, std::span<const ServiceZone> services,
                           std::size_t window, double epsilon = 1e-6) {
    Scorecard s;
    s.events = log.size();

    double num = 0.0, den = 0.0;
    for (std::size_t svc = 0; svc < services.size(); ++svc) {
        std::uint64_t valid = 0, total = 0;
        for (const auto& r : log) {
            if (r.service != svc) continue;
            ++total;
            const bool legit = !r.scenario.has_value();
            const bool passed = r.action == Action::step_up && (!r.challenge_passed || *r.challenge_passed);
            if (legit && (r.action == Action::allow || passed)) ++valid;
        }
        num += services[svc].weight * static_cast<double>(valid);
        den += services[svc].weight * static_cast<double>(total);
    }
    s.tii = den > 0.0 ? num / den : 0.0;

    for (const auto& r : log) {
        if (r.scenario) {
            ++s.incidents;
            const bool stopped = r.action == Action::block ||
                                 (r.action == Action::step_up && !(r.challenge_passed && *r.challenge_passed));
            if (r.automated && stopped) ++s.auto_handled;
        }
        if (r.automated && r.action != Action::allow) {
            ++s.auto_actions;
            if (r.confirmed_correct && *r.confirmed_correct) ++s.confirmed;
        }
    }
    s.sae = s.incidents ? static_cast<double>(s.auto_handled) / static_cast<double>(s.incidents) : 0.0;
    s.acf = s.auto_actions ? static_cast<double>(s.confirmed) / static_cast<double>(s.auto_actions) : 0.0;
    s.sae_star = s.sae * s.acf;

    // Per-user trajectories in log order; a window opens at the first attack
    // of each run of consecutive attack events for that user.
    std::map<std::uint32_t, std::vector<const DecisionRecord*>> by_user;
    for (const auto& r : log) by_user[r.user.index].push_back(&r);
    double sum = 0.0;
    for (const auto& [user, traj] : by_user) {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (!traj[i]->scenario) continue;
            if (i > 0 && traj[i - 1]->scenario) continue;
            const std::size_t end = std::min(i + window - 1, traj.size() - 1);
            const double start = traj[i]->identity_score;
            sum += (start - traj[end]->identity_score) / std::max(start, epsilon);
            ++s.ital_windows;
        }
    }
    s.ital = s.ital_windows ? sum / static_cast<double>(s.ital_windows) : 0.0;
    return s;
}

struct Mismatch {
    std::string quantity;
    double streaming = 0.0;
    double brute_force = 0.0;
};

/// Differences between streamed metrics and the brute-force pass. Counts must
/// match exactly, ratios within tol.
inline std::vector<Mismatch> compare(const RunMetrics& m, const Scorecard& s, double tol = 1e-12) {
    std::vector<Mismatch> out;
    auto exact = [&](const char* q, double a, double b) {
        if (a != b) out.push_back({q, a, b});
    };
    auto close = [&](const char* q, double a, double b) {
        if (!(std::abs(a - b) <= tol)) out.push_back({q, a, b});
    };
    exact("events", static_cast<double>(m.events), static_cast<double>(s.events));
    exact("incidents", static_cast<double>(m.incidents), static_cast<double>(s.incidents));
    close("tii", m.tii, s.tii);
    close("sae", m.sae, s.sae);
    close("sae_star", m.sae_star, s.sae_star);
    close("ital", m.ital, s.ital);
    close("acf", m.acf, s.acf);
    return out;
}

} // namespace ztbench::oracle
