#include "ztbench/dataset.hpp"

#include "ztbench/errors.hpp"
#include "ztbench/rng.hpp"
#include "ztbench/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace ztbench {

namespace {

using namespace std::chrono;

bool device_centric(ScenarioKind k) { return k == ScenarioKind::session_hijack || k == ScenarioKind::card_theft; }

std::string format_id(char prefix, std::uint32_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%05u", prefix, index + 1);
    return buf;
}

double round_cents(double amount) { return std::max(0.01, std::round(amount * 100.0) / 100.0); }

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// Benign amounts at stratified lognormal quantiles exp(mu + sigma * z_i), with
// mu and sigma chosen so that, together with the fraud amounts, the whole
// dataset hits the target median and mean.
std::vector<double> calibrated_benign_amounts(std::size_t n_benign, std::span<const double> fraud,
                                              double target_median, double target_mean) {
    const double n = static_cast<double>(n_benign + fraud.size());
    const double fraud_sum = std::accumulate(fraud.begin(), fraud.end(), 0.0);
    const double fraud_low =
        static_cast<double>(std::count_if(fraud.begin(), fraud.end(), [&](double a) { return a <= target_median; }));
    const double benign_mean = (n * target_mean - fraud_sum) / static_cast<double>(n_benign);
    if (!(benign_mean > target_median)) throw ConfigError("fraud amounts leave no room for the target mean");

    const double below = std::clamp((n / 2.0 - fraud_low) / static_cast<double>(n_benign), 0.01, 0.99);
    const double z_star = stats::normal_quantile(below);
    std::vector<double> z(n_benign);
    for (std::size_t i = 0; i < n_benign; ++i)
        z[i] = stats::normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n_benign));

    // log of the benign sample mean relative to the median, as a function of sigma.
    auto log_ratio = [&](double sigma) {
        double s = 0.0;
        for (double zi : z) s += std::exp(sigma * (zi - z_star));
        return std::log(s / static_cast<double>(n_benign));
    };
    const double target = std::log(benign_mean / target_median);
    double lo = 1e-3, hi = 6.0;
    if (log_ratio(hi) < target) throw ConfigError("amount calibration out of range");
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        (log_ratio(mid) < target ? lo : hi) = mid;
    }
    const double sigma = 0.5 * (lo + hi);
    const double mu = std::log(target_median) - sigma * z_star;

    std::vector<double> out(n_benign);
    for (std::size_t i = 0; i < n_benign; ++i) out[i] = round_cents(std::exp(mu + sigma * z[i]));
    return out;
}

struct RawRow {
    std::int64_t t = 0;
    std::uint32_t user = 0, device = 0, service = 0, region = 0;
    Channel channel = Channel::web;
    double amount = 0.0;
    std::optional<ScenarioKind> kind;
};

template <typename T>
T parse_number(std::string_view s, const char* field) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError(std::string("invalid ") + field + " '" + std::string(s) + "'");
    return v;
}

} // namespace

// ── Profile ──────────────────────────────────────────────────────────────────

void DatasetProfile::validate() const {
    if (!(fraud_rate >= 0.0 && fraud_rate <= 1.0)) throw ConfigError("fraud_rate must lie in [0,1]");
    double shares = 0.0;
    for (double s : scenario_shares) {
        if (!(s >= 0.0)) throw ConfigError("scenario shares must be non-negative");
        shares += s;
    }
    if (!(shares > 0.0)) throw ConfigError("scenario shares must have a positive sum");
    if (!(records_per_user >= 1.0)) throw ConfigError("records_per_user must be at least 1");
    if (!(devices_per_user >= 1.0)) throw ConfigError("devices_per_user must be at least 1");
    if (!(compromised_device_share > 0.0 && compromised_device_share <= 1.0))
        throw ConfigError("compromised_device_share must lie in (0,1]");
    if (services.size() != service_traffic.size())
        throw ConfigError("service_traffic must have one entry per service");
    if (span_months <= 0) throw ConfigError("span_months must be positive");
    generator(1000).validate();
}

std::uint32_t DatasetProfile::users_for(std::size_t n) const {
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(static_cast<double>(n) / records_per_user)));
}

std::uint32_t DatasetProfile::devices_for(std::size_t n) const {
    const auto users = users_for(n);
    return std::max(users, static_cast<std::uint32_t>(std::lround(devices_per_user * users)));
}

std::uint64_t DatasetProfile::fraud_count(std::size_t n) const {
    return static_cast<std::uint64_t>(std::llround(fraud_rate * static_cast<double>(n)));
}

std::array<std::uint64_t, kScenarioCount> DatasetProfile::scenario_counts(std::size_t n) const {
    const auto total = fraud_count(n);
    const double share_sum = std::accumulate(scenario_shares.begin(), scenario_shares.end(), 0.0);
    std::array<std::uint64_t, kScenarioCount> counts{};
    std::array<double, kScenarioCount> remainder{};
    std::uint64_t assigned = 0;
    for (std::size_t k = 0; k < kScenarioCount; ++k) {
        const double exact = static_cast<double>(total) * scenario_shares[k] / share_sum;
        counts[k] = static_cast<std::uint64_t>(std::floor(exact));
        remainder[k] = exact - static_cast<double>(counts[k]);
        assigned += counts[k];
    }
    std::array<std::size_t, kScenarioCount> order{};
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[order[i % kScenarioCount]];
    return counts;
}

GeneratorConfig DatasetProfile::generator(std::size_t n) const {
    GeneratorConfig g;
    g.n_users = users_for(n);
    g.n_devices = devices_for(n);
    g.n_events = std::max<std::size_t>(n, 1);
    g.service_zones = services;
    g.zone_traffic = service_traffic;
    g.amount_mean = amount_mean;
    g.amount_median = amount_median;
    g.amount_cap = amount_cap;
    g.scenario_mix = {};
    const double share_sum = std::accumulate(scenario_shares.begin(), scenario_shares.end(), 0.0);
    for (std::size_t k = 0; k < kScenarioCount; ++k) g.scenario_mix[k] = scenario_shares[k] / share_sum;
    return g;
}

// ── Generation ───────────────────────────────────────────────────────────────

std::vector<TransactionRecord> generate_dataset(std::size_t n, std::uint64_t seed, const DatasetProfile& profile) {
    if (n < 100) throw ConfigError("dataset size must be at least 100");
    profile.validate();
    const GeneratorConfig g = profile.generator(n);
    Rng rng(seed);
    const Population pop = build_population(g, rng);
    const double sigma = g.log_sigma();
    const double txn_sigma = std::sqrt(sigma * sigma - g.user_spend_sigma * g.user_spend_sigma);
    const std::int64_t span =
        duration_cast<seconds>(sys_days(year_month_day(profile.start) + months(profile.span_months)) - profile.start)
            .count();

    // Devices reused by device-centric fraud, dealt round-robin so each is hit.
    std::vector<std::uint32_t> pool(g.n_devices);
    std::iota(pool.begin(), pool.end(), 0);
    shuffle(pool, rng);
    pool.resize(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(profile.compromised_device_share *
                                                                                g.n_devices))));
    std::size_t pool_cursor = 0;

    auto habitual = [&](std::uint32_t u) {
        const UserProfile& p = pop.users[u];
        RawRow r;
        r.user = u;
        r.device = p.devices[rng.below(p.devices.size())];
        r.region = rng.bernoulli(g.home_region_prob) ? p.home_region : static_cast<std::uint32_t>(rng.below(g.roaming_regions));
        r.channel = rng.bernoulli(g.preferred_channel_prob) ? p.preferred_channel
                                                             : static_cast<Channel>(rng.below(kChannelCount));
        r.service = rng.bernoulli(g.home_zone_prob) ? p.home_zone
                                                     : static_cast<std::uint32_t>(rng.below(g.service_zones.size()));
        return r;
    };

    std::vector<RawRow> rows;
    rows.reserve(n);
    std::vector<double> fraud_amounts;
    const auto counts = profile.scenario_counts(n);
    for (std::size_t k = 0; k < kScenarioCount; ++k) {
        const auto kind = static_cast<ScenarioKind>(k);
        const auto& len = g.chain_length[k];
        for (std::uint64_t left = counts[k]; left > 0;) {
            const auto chain = std::min<std::uint64_t>(left, static_cast<std::uint64_t>(rng.between(len.min, len.max)));
            const auto victim = static_cast<std::uint32_t>(rng.below(g.n_users));
            const UserProfile& p = pop.users[victim];
            std::int64_t t = rng.between(0, span - 1 - static_cast<std::int64_t>(chain) * 3600);
            for (std::uint32_t pos = 0; pos < chain; ++pos) {
                if (pos > 0) t += rng.between(60, 3600);
                RawRow r = habitual(victim);
                double amount = std::exp(g.log_mu() + p.spend_offset + txn_sigma * rng.normal());
                const Injection inj = inject_scenario(kind, {pos, p.home_region, p.home_zone}, g, rng);
                const auto& o = inj.overrides;
                r.amount = round_cents(o.amount.value_or(amount) * o.amount_scale);
                r.service = o.service.value_or(r.service);
                r.channel = o.channel.value_or(r.channel);
                r.region = o.region.value_or(r.region);
                if (device_centric(kind)) r.device = pool[pool_cursor++ % pool.size()];
                r.t = t;
                r.kind = kind;
                fraud_amounts.push_back(r.amount);
                rows.push_back(r);
            }
            left -= chain;
        }
    }

    const std::size_t n_benign = n - rows.size();
    std::vector<double> amounts =
        calibrated_benign_amounts(n_benign, fraud_amounts, profile.amount_median, profile.amount_mean);
    shuffle(amounts, rng);
    for (std::size_t i = 0; i < n_benign; ++i) {
        // The first rows visit every device once so the whole population appears.
        RawRow r;
        if (i < g.n_devices) {
            r = habitual(pop.device_owner[i]);
            r.device = static_cast<std::uint32_t>(i);
        } else {
            r = habitual(static_cast<std::uint32_t>(rng.below(g.n_users)));
        }
        r.t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
        r.amount = amounts[i];
        rows.push_back(r);
    }

    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.t < b.t; });
    const std::int64_t epoch = duration_cast<seconds>(profile.start.time_since_epoch()).count();
    std::vector<TransactionRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const RawRow& r = rows[i];
        TransactionRecord rec;
        rec.transaction_id = i + 1;
        rec.timestamp = format_timestamp(epoch + r.t);
        rec.user_id = format_id('U', r.user);
        rec.device_id = format_id('D', r.device);
        rec.service = profile.services[r.service].name;
        rec.channel = r.channel;
        rec.geolocation = r.region;
        rec.amount = r.amount;
        rec.fraud_scenario = r.kind;
        out.push_back(std::move(rec));
    }
    return out;
}

DatasetSummary summarize_dataset(std::span<const TransactionRecord> records) {
    DatasetSummary s;
    s.rows = records.size();
    if (records.empty()) return s;
    std::vector<double> amounts;
    std::set<std::string> users, devices, compromised;
    for (const auto& r : records) {
        amounts.push_back(r.amount);
        users.insert(r.user_id);
        devices.insert(r.device_id);
        if (r.fraud_scenario) {
            ++s.fraud_rows;
            ++s.scenario_counts[std::string(to_string(*r.fraud_scenario))];
            if (device_centric(*r.fraud_scenario)) compromised.insert(r.device_id);
        }
    }
    s.fraud_rate = static_cast<double>(s.fraud_rows) / static_cast<double>(s.rows);
    s.amount_mean = stats::mean(amounts);
    s.amount_sd = stats::sample_sd(amounts);
    std::sort(amounts.begin(), amounts.end());
    const std::size_t mid = amounts.size() / 2;
    s.amount_median = amounts.size() % 2 ? amounts[mid] : 0.5 * (amounts[mid - 1] + amounts[mid]);
    s.users = users.size();
    s.devices = devices.size();
    s.compromised_devices = compromised.size();
    return s;
}

// ── CSV ──────────────────────────────────────────────────────────────────────

std::int64_t parse_timestamp(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SSZ
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
        throw DataError("invalid timestamp '" + std::string(s) + "'");
    auto num = [&](std::size_t pos, std::size_t len) { return parse_number<int>(s.substr(pos, len), "timestamp"); };
    const year_month_day ymd{year{num(0, 4)}, month{static_cast<unsigned>(num(5, 2))},
                             day{static_cast<unsigned>(num(8, 2))}};
    const int hh = num(11, 2), mm = num(14, 2), ss = num(17, 2);
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw DataError("invalid timestamp '" + std::string(s) + "'");
    return duration_cast<seconds>(sys_days(ymd).time_since_epoch()).count() + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    const sys_seconds tp{seconds{epoch_seconds}};
    const auto day_point = floor<days>(tp);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{tp - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

void write_csv(std::ostream& out, std::span<const TransactionRecord> records) {
    out << kCsvHeader << '\n';
    char amount[64];
    for (const auto& r : records) {
        auto [end, ec] = std::to_chars(amount, amount + sizeof amount, r.amount, std::chars_format::fixed, 2);
        out << r.transaction_id << ',' << r.timestamp << ',' << r.user_id << ',' << r.device_id << ',' << r.service
            << ',' << to_string(r.channel) << ',' << r.geolocation << ',' << std::string_view(amount, end) << ','
            << (r.fraud_flag() ? '1' : '0') << ',';
        if (r.fraud_scenario) out << to_string(*r.fraud_scenario);
        out << '\n';
    }
    if (!out) throw IoError("failed writing CSV output");
}

std::vector<TransactionRecord> read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty dataset");
    ++line_no;
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw DataError("line 1: unexpected header '" + line + "'");

    std::vector<TransactionRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            std::vector<std::string_view> f;
            std::string_view rest = line;
            for (;;) {
                auto comma = rest.find(',');
                f.push_back(rest.substr(0, comma));
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            if (f.size() != 10) throw DataError("expected 10 fields, found " + std::to_string(f.size()));
            TransactionRecord r;
            r.transaction_id = parse_number<std::uint64_t>(f[0], "transaction_id");
            parse_timestamp(f[1]);
            r.timestamp = f[1];
            if (f[2].empty() || f[3].empty() || f[4].empty()) throw DataError("empty identifier field");
            r.user_id = f[2];
            r.device_id = f[3];
            r.service = f[4];
            r.channel = parse_channel(f[5]);
            r.geolocation = parse_number<std::uint32_t>(f[6], "geolocation");
            if (r.geolocation >= kRegionCount)
                throw DataError("geolocation " + std::to_string(r.geolocation) + " outside [0,15)");
            r.amount = parse_number<double>(f[7], "amount");
            if (!std::isfinite(r.amount) || r.amount < 0.0) throw DataError("amount must be non-negative");
            if (f[8] == "1") {
                if (f[9].empty()) throw DataError("fraud_flag=1 with empty fraud_scenario");
                r.fraud_scenario = parse_scenario(f[9]);
            } else if (f[8] == "0") {
                if (!f[9].empty()) throw DataError("fraud_scenario set on a non-fraud row");
            } else {
                throw DataError("fraud_flag must be 0 or 1");
            }
            out.push_back(std::move(r));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.empty()) throw DataError("dataset has no records");
    return out;
}

// ── Ingest ───────────────────────────────────────────────────────────────────

IngestResult ingest_dataset(std::span<const TransactionRecord> records, const DatasetProfile& profile) {
    if (records.empty()) throw DataError("empty dataset");
    const GeneratorConfig g = profile.generator(records.size());

    std::unordered_map<std::string, std::uint32_t> service_index;
    for (std::size_t i = 0; i < profile.services.size(); ++i)
        service_index.emplace(profile.services[i].name, static_cast<std::uint32_t>(i));

    std::vector<std::int64_t> times(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) times[i] = parse_timestamp(records[i].timestamp);
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    IngestResult res;
    if (!std::is_sorted(times.begin(), times.end())) {
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
        res.warnings.push_back("records were not in timestamp order; reordered by timestamp");
    }

    std::unordered_map<std::string, std::uint32_t> users, devices;
    struct Chain {
        std::optional<ScenarioKind> last;
        std::uint32_t position = 0;
    };
    std::unordered_map<std::uint32_t, Chain> chains;
    res.events.reserve(records.size());
    for (std::size_t idx : order) {
        const TransactionRecord& r = records[idx];
        auto svc = service_index.find(r.service);
        if (svc == service_index.end())
            throw DataError("transaction " + std::to_string(r.transaction_id) + ": unknown service '" + r.service + "'");
        const auto u = users.try_emplace(r.user_id, static_cast<std::uint32_t>(users.size())).first->second;
        const auto d = devices.try_emplace(r.device_id, static_cast<std::uint32_t>(devices.size())).first->second;

        Event e;
        e.time_index = res.events.size();
        e.user = user_id(u);
        e.device = device_id(d);
        e.context = context_of(r.geolocation, r.channel);
        e.attack = r.fraud_scenario;
        auto& t = e.transaction;
        t.id = r.transaction_id;
        t.amount = r.amount;
        t.service = service_id(svc->second);
        t.channel = r.channel;
        t.region = r.geolocation;
        t.normalized_risk = normalized_risk(r.amount, r.channel, r.geolocation, profile.amount_cap);

        Rng rng(mix_seed(r.transaction_id));
        Chain& chain = chains[u];
        if (r.fraud_scenario) {
            chain.position = chain.last == r.fraud_scenario ? chain.position + 1 : 0;
            e.anomaly = inject_scenario(*r.fraud_scenario, {chain.position, 0, 0}, g, rng).signals;
        } else {
            e.anomaly.user = rng.beta(g.benign_anomaly.a, g.benign_anomaly.b);
            e.anomaly.device = rng.beta(g.benign_anomaly.a, g.benign_anomaly.b);
            e.anomaly.context = rng.beta(g.benign_anomaly.a, g.benign_anomaly.b);
        }
        chain.last = r.fraud_scenario;
        res.events.push_back(e);
    }
    res.users = users.size();
    res.devices = devices.size();
    return res;
}

} // namespace ztbench
