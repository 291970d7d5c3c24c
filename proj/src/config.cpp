#include "ztbench/config.hpp"

#include "ztbench/errors.hpp"

#include <fstream>

namespace ztbench {

using nlohmann::json;

namespace {

template <typename F>
void each(const json& obj, const std::string& section, F&& handle) {
    if (!obj.is_object()) throw ConfigError("'" + section + "' must be an object");
    for (const auto& [key, value] : obj.items())
        if (!handle(key, value)) throw ConfigError("unknown config key '" + section + "." + key + "'");
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    return v.get<double>();
}

template <typename T>
T integer(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("'" + key + "' must be a non-negative integer");
    return v.get<T>();
}

std::vector<double> numbers(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("'" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number(x, key));
    return out;
}

BetaShape beta_shape(const json& v, const std::string& key) {
    auto p = numbers(v, key);
    if (p.size() != 2) throw ConfigError("'" + key + "' must be [a, b]");
    return {p[0], p[1]};
}

template <typename T, typename F>
void per_scenario(const json& v, const std::string& key, std::array<T, kScenarioCount>& target, F&& convert) {
    each(v, key, [&](const std::string& name, const json& x) {
        ScenarioKind kind;
        try {
            kind = parse_scenario(name);
        } catch (const DataError& e) {
            throw ConfigError(key + ": " + e.what());
        }
        target[static_cast<std::size_t>(kind)] = convert(x, key + "." + name);
        return true;
    });
}

void apply_run(RunConfig& c, const json& doc) {
    each(doc, "run", [&](const std::string& k, const json& v) {
        if (k == "runs") c.runs = integer<std::uint32_t>(v, k);
        else if (k == "events_per_run") c.events_per_run = integer<std::uint64_t>(v, k);
        else if (k == "base_seed") c.base_seed = integer<std::uint64_t>(v, k);
        else if (k == "ital_window") c.ital_window = integer<std::size_t>(v, k);
        else if (k == "engines") {
            if (!v.is_array()) throw ConfigError("'engines' must be an array");
            c.engines.clear();
            for (const auto& e : v) {
                if (!e.is_string()) throw ConfigError("'engines' entries must be strings");
                c.engines.push_back(parse_engine(e.get<std::string>()));
            }
        } else return false;
        return true;
    });
}

void apply_generator(GeneratorConfig& g, const json& doc) {
    each(doc, "generator", [&](const std::string& k, const json& v) {
        if (k == "n_users") g.n_users = integer<std::uint32_t>(v, k);
        else if (k == "n_devices") g.n_devices = integer<std::uint32_t>(v, k);
        else if (k == "attack_probability") g.attack_probability = number(v, k);
        else if (k == "scenario_mix") {
            g.scenario_mix = {};
            per_scenario(v, k, g.scenario_mix, number);
        } else if (k == "service_zones") {
            if (!v.is_array()) throw ConfigError("'service_zones' must be an array");
            g.service_zones.clear();
            for (const auto& z : v) {
                ServiceZone zone;
                each(z, k, [&](const std::string& zk, const json& zv) {
                    if (zk == "name" && zv.is_string()) zone.name = zv.get<std::string>();
                    else if (zk == "weight") zone.weight = number(zv, "service_zones.weight");
                    else return false;
                    return true;
                });
                if (zone.name.empty()) throw ConfigError("service zone needs a name");
                g.service_zones.push_back(zone);
            }
        } else if (k == "zone_traffic") g.zone_traffic = numbers(v, k);
        else if (k == "benign_anomaly") g.benign_anomaly = beta_shape(v, k);
        else if (k == "attack_anomaly") per_scenario(v, k, g.attack_anomaly, beta_shape);
        else if (k == "attack_secondary") g.attack_secondary = beta_shape(v, k);
        else if (k == "chain_length") {
            per_scenario(v, k, g.chain_length, [](const json& x, const std::string& key) {
                if (!x.is_array() || x.size() != 2) throw ConfigError("'" + key + "' must be [min, max]");
                return ChainLength{integer<std::uint32_t>(x[0], key), integer<std::uint32_t>(x[1], key)};
            });
        } else if (k == "amount_median") g.amount_median = number(v, k);
        else if (k == "amount_mean") g.amount_mean = number(v, k);
        else if (k == "user_spend_sigma") g.user_spend_sigma = number(v, k);
        else if (k == "home_region_prob") g.home_region_prob = number(v, k);
        else if (k == "preferred_channel_prob") g.preferred_channel_prob = number(v, k);
        else if (k == "home_zone_prob") g.home_zone_prob = number(v, k);
        else if (k == "home_regions") g.home_regions = integer<std::uint32_t>(v, k);
        else if (k == "roaming_regions") g.roaming_regions = integer<std::uint32_t>(v, k);
        else if (k == "hostile_region_prob") g.hostile_region_prob = number(v, k);
        else return false;
        return true;
    });
}

void apply_policy(PolicyConfig& p, const json& doc) {
    each(doc, "policy", [&](const std::string& k, const json& v) {
        if (k == "theta_block") p.theta_block = number(v, k);
        else if (k == "theta_stepup") p.theta_stepup = number(v, k);
        else if (k == "weights") {
            double wi = p.weights.identity(), wd = p.weights.device(), wr = p.weights.risk(), wc = p.weights.context();
            each(v, k, [&](const std::string& wk, const json& wv) {
                if (wk == "identity") wi = number(wv, wk);
                else if (wk == "device") wd = number(wv, wk);
                else if (wk == "risk") wr = number(wv, wk);
                else if (wk == "context") wc = number(wv, wk);
                else return false;
                return true;
            });
            p.weights = TrustWeights(wi, wd, wr, wc);
        } else if (k == "adaptation") {
            each(v, k, [&](const std::string& ak, const json& av) {
                if (ak == "eta_identity") p.adaptation.eta_identity = number(av, ak);
                else if (ak == "eta_device") p.adaptation.eta_device = number(av, ak);
                else if (ak == "eta_context") p.adaptation.eta_context = number(av, ak);
                else if (ak == "epsilon") p.adaptation.epsilon = number(av, ak);
                else return false;
                return true;
            });
        } else if (k == "fts_weights") {
            each(v, k, [&](const std::string& fk, const json& fv) {
                if (fk == "alpha") p.fts_weights.alpha = number(fv, fk);
                else if (fk == "beta") p.fts_weights.beta = number(fv, fk);
                else if (fk == "gamma") p.fts_weights.gamma = number(fv, fk);
                else return false;
                return true;
            });
        } else if (k == "band_thresholds") p.band_thresholds = numbers(v, k);
        else if (k == "amount_cap") p.amount_cap = number(v, k);
        else if (k == "acf_autonomy_floor") p.acf_autonomy_floor = number(v, k);
        else if (k == "initial_trust") p.initial_trust = number(v, k);
        else if (k == "service_thresholds") {
            p.service_thresholds.clear();
            each(v, k, [&](const std::string& sk, const json& sv) {
                std::uint32_t index;
                try {
                    std::size_t used = 0;
                    index = static_cast<std::uint32_t>(std::stoul(sk, &used));
                    if (used != sk.size()) throw std::invalid_argument(sk);
                } catch (const std::exception&) {
                    throw ConfigError("service_thresholds keys must be service indices");
                }
                ThresholdPair pair;
                each(sv, k + "." + sk, [&](const std::string& tk, const json& tv) {
                    if (tk == "block") pair.block = number(tv, tk);
                    else if (tk == "step_up") pair.step_up = number(tv, tk);
                    else return false;
                    return true;
                });
                p.service_thresholds[index] = pair;
                return true;
            });
        } else return false;
        return true;
    });
}

void apply_baseline(BaselineRules& b, const json& doc) {
    each(doc, "baseline_rules", [&](const std::string& k, const json& v) {
        if (k == "amount_limit") b.amount_limit = number(v, k);
        else if (k == "blocked_regions") {
            if (!v.is_array()) throw ConfigError("'blocked_regions' must be an array");
            b.blocked_regions.clear();
            for (const auto& r : v) b.blocked_regions.insert(integer<std::uint32_t>(r, k));
        } else if (k == "stepup_rules") {
            if (!v.is_array()) throw ConfigError("'stepup_rules' must be an array");
            b.stepup_rules.clear();
            for (const auto& r : v) {
                StepUpRule rule;
                each(r, k, [&](const std::string& rk, const json& rv) {
                    if (rk == "channel" && rv.is_string()) {
                        try {
                            rule.channel = parse_channel(rv.get<std::string>());
                        } catch (const DataError& e) {
                            throw ConfigError(e.what());
                        }
                    } else if (rk == "region") rule.region = integer<std::uint32_t>(rv, rk);
                    else return false;
                    return true;
                });
                b.stepup_rules.push_back(rule);
            }
        } else return false;
        return true;
    });
}

void apply_challenge(ChallengeModel& c, const json& doc) {
    each(doc, "challenge", [&](const std::string& k, const json& v) {
        if (k == "legit_pass_rate") c.legit_pass_rate = number(v, k);
        else if (k == "attacker_pass_rate") c.attacker_pass_rate = number(v, k);
        else return false;
        return true;
    });
}

json shape_json(const BetaShape& s) { return json::array({s.a, s.b}); }

} // namespace

void apply_config(RunConfig& config, const json& doc) {
    each(doc, "", [&](const std::string& k, const json& v) {
        if (k == "run") apply_run(config, v);
        else if (k == "generator") apply_generator(config.generator, v);
        else if (k == "policy") apply_policy(config.policy, v);
        else if (k == "baseline_rules") apply_baseline(config.baseline_rules, v);
        else if (k == "challenge") apply_challenge(config.challenge, v);
        else return false;
        return true;
    });
    config.validate();
}

RunConfig run_config_from_json(const json& doc) {
    RunConfig c;
    apply_config(c, doc);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    // A run manifest carries its resolved config under "config".
    if (doc.is_object() && doc.contains("tool") && doc.contains("config")) return run_config_from_json(doc["config"]);
    return run_config_from_json(doc);
}

json to_json(const RunConfig& c) {
    json run{{"runs", c.runs},
             {"events_per_run", c.events_per_run},
             {"base_seed", c.base_seed},
             {"ital_window", c.ital_window},
             {"engines", json::array()}};
    for (auto e : c.engines) run["engines"].push_back(std::string(to_string(e)));

    const auto& g = c.generator;
    json zones = json::array();
    for (const auto& z : g.service_zones) zones.push_back({{"name", z.name}, {"weight", z.weight}});
    json mix = json::object(), attack = json::object(), chains = json::object();
    for (std::size_t k = 0; k < kScenarioCount; ++k) {
        const std::string name(to_string(static_cast<ScenarioKind>(k)));
        mix[name] = g.scenario_mix[k];
        attack[name] = shape_json(g.attack_anomaly[k]);
        chains[name] = json::array({g.chain_length[k].min, g.chain_length[k].max});
    }
    json generator{{"n_users", g.n_users},
                   {"n_devices", g.n_devices},
                   {"attack_probability", g.attack_probability},
                   {"scenario_mix", mix},
                   {"service_zones", zones},
                   {"zone_traffic", g.zone_traffic},
                   {"benign_anomaly", shape_json(g.benign_anomaly)},
                   {"attack_anomaly", attack},
                   {"attack_secondary", shape_json(g.attack_secondary)},
                   {"chain_length", chains},
                   {"amount_median", g.amount_median},
                   {"amount_mean", g.amount_mean},
                   {"user_spend_sigma", g.user_spend_sigma},
                   {"home_region_prob", g.home_region_prob},
                   {"preferred_channel_prob", g.preferred_channel_prob},
                   {"home_zone_prob", g.home_zone_prob},
                   {"home_regions", g.home_regions},
                   {"roaming_regions", g.roaming_regions},
                   {"hostile_region_prob", g.hostile_region_prob}};

    const auto& p = c.policy;
    json thresholds = json::object();
    for (const auto& [svc, pair] : p.service_thresholds)
        thresholds[std::to_string(svc)] = {{"block", pair.block}, {"step_up", pair.step_up}};
    json policy{{"theta_block", p.theta_block},
                {"theta_stepup", p.theta_stepup},
                {"weights",
                 {{"identity", p.weights.identity()},
                  {"device", p.weights.device()},
                  {"risk", p.weights.risk()},
                  {"context", p.weights.context()}}},
                {"adaptation",
                 {{"eta_identity", p.adaptation.eta_identity},
                  {"eta_device", p.adaptation.eta_device},
                  {"eta_context", p.adaptation.eta_context},
                  {"epsilon", p.adaptation.epsilon}}},
                {"fts_weights", {{"alpha", p.fts_weights.alpha}, {"beta", p.fts_weights.beta}, {"gamma", p.fts_weights.gamma}}},
                {"band_thresholds", p.band_thresholds},
                {"amount_cap", p.amount_cap},
                {"acf_autonomy_floor", p.acf_autonomy_floor},
                {"initial_trust", p.initial_trust},
                {"service_thresholds", thresholds}};

    json rules = json::array();
    for (const auto& r : c.baseline_rules.stepup_rules) {
        json j = json::object();
        if (r.channel) j["channel"] = std::string(to_string(*r.channel));
        if (r.region) j["region"] = *r.region;
        rules.push_back(j);
    }
    json baseline{{"amount_limit", c.baseline_rules.amount_limit},
                  {"blocked_regions", json(std::vector<std::uint32_t>(c.baseline_rules.blocked_regions.begin(),
                                                                      c.baseline_rules.blocked_regions.end()))},
                  {"stepup_rules", rules}};

    json challenge{{"legit_pass_rate", c.challenge.legit_pass_rate},
                   {"attacker_pass_rate", c.challenge.attacker_pass_rate}};

    return {{"run", run}, {"generator", generator}, {"policy", policy}, {"baseline_rules", baseline},
            {"challenge", challenge}};
}

} // namespace ztbench
