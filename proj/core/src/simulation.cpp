#include "bci/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "bci/errors.hpp"
#include "bci/numeric.hpp"
#include "bci/rng.hpp"

namespace bci {
namespace {

using nlohmann::json;

bool can_provide(const PeerProfile& p) { return p.kind != PeerProfile::Kind::FreeRider; }
bool can_consume(const PeerProfile& p) { return p.kind != PeerProfile::Kind::PureContributor; }

double provider_weight(const PeerProfile& p) {
    switch (p.kind) {
        case PeerProfile::Kind::Cooperative: return p.generosity;
        case PeerProfile::Kind::PureContributor: return 1.0;
        case PeerProfile::Kind::FreeRider: return 0.0;
    }
    return 0.0;
}

std::size_t weighted_pick(const std::vector<double>& weights, std::mt19937_64& rng) {
    double total = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        total += weights[i];
        if (weights[i] > 0.0) last_positive = i;
    }
    double u = uniform_double(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
    }
    return last_positive;  // rounding slop lands on the last eligible entry
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* profile_kind_name(PeerProfile::Kind k) {
    switch (k) {
        case PeerProfile::Kind::Cooperative: return "cooperative";
        case PeerProfile::Kind::FreeRider: return "free_rider";
        case PeerProfile::Kind::PureContributor: return "pure_contributor";
    }
    return "?";
}

PeerProfile profile_from_json(const json& j, std::size_t idx) {
    std::string kind;
    double generosity = 1.0;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else if (j.is_object() && j.contains("kind") && j["kind"].is_string()) {
        kind = j["kind"].get<std::string>();
        if (j.contains("generosity")) {
            if (!j["generosity"].is_number()) {
                throw InvalidConfig("peer_profiles", "entry " + std::to_string(idx + 1) +
                                                         ": generosity must be a number");
            }
            generosity = j["generosity"].get<double>();
        }
    } else {
        throw InvalidConfig("peer_profiles",
                            "entry " + std::to_string(idx + 1) +
                                ": expected a kind string or {\"kind\", \"generosity\"}");
    }
    if (kind == "cooperative") return PeerProfile::cooperative(generosity);
    if (kind == "free_rider") return PeerProfile::free_rider();
    if (kind == "pure_contributor") return PeerProfile::pure_contributor();
    throw InvalidConfig("peer_profiles",
                        "entry " + std::to_string(idx + 1) + ": unknown kind '" + kind + "'");
}

}  // namespace

void SimConfig::validate() const {
    if (n < 2) throw InvalidConfig("n", "need at least 2 peers, got " + std::to_string(n));
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidConfig("alpha", "must lie in (0, 1), got " + std::to_string(alpha));
    }
    const double t = effective_threshold();
    if (t < 1.0 - alpha || t > 1.0) {
        throw InvalidConfig("threshold", "must lie in [1 - alpha, 1], got " + std::to_string(t));
    }
    if (recompute_every < 1) throw InvalidConfig("recompute_every", "must be at least 1");
    if (duration < 1) throw InvalidConfig("duration", "must be at least 1");
    if (peer_profiles.size() != n) {
        throw InvalidConfig("peer_profiles", "expected " + std::to_string(n) + " entries, got " +
                                                 std::to_string(peer_profiles.size()));
    }
    for (std::size_t i = 0; i < peer_profiles.size(); ++i) {
        const PeerProfile& p = peer_profiles[i];
        if (p.kind == PeerProfile::Kind::Cooperative && !(p.generosity > 0.0)) {
            throw InvalidConfig("peer_profiles", "entry " + std::to_string(i + 1) +
                                                     ": cooperative generosity must be positive");
        }
    }
    std::size_t providers = 0, consumers = 0;
    for (const PeerProfile& p : peer_profiles) {
        if (can_provide(p)) ++providers;
        if (can_consume(p)) ++consumers;
    }
    if (providers == 0) throw InvalidConfig("peer_profiles", "no peer can upload");
    if (consumers == 0) throw InvalidConfig("peer_profiles", "no peer can download");
    if (consumers == 1 && providers >= 1) {
        // The sole consumer must never be the drawn provider.
        for (std::size_t i = 0; i < peer_profiles.size(); ++i) {
            if (can_consume(peer_profiles[i]) && can_provide(peer_profiles[i])) {
                throw InvalidConfig("peer_profiles",
                                    "a single consumable peer cannot also be a provider");
            }
        }
    }
}

SimOutcome run_simulation(const SimConfig& config) {
    config.validate();
    const std::size_t n = config.n;
    const double threshold = config.effective_threshold();

    std::mt19937_64 rng(config.rng_seed);
    ShareMatrix ledger(n);
    BciVector bci = initial_vector(n, config.alpha);

    std::vector<double> prov_weights(n);
    for (std::size_t i = 0; i < n; ++i) prov_weights[i] = provider_weight(config.peer_profiles[i]);

    SimMetrics m;
    m.uploaded_total.assign(n, 0.0);
    m.downloaded_total.assign(n, 0.0);
    m.denied_downloads.assign(n, 0);
    std::vector<long> committed(n, 0);

    // Consumers are ranked by current score, ascending; a peer's pick weight
    // is its rank position, so better-scoring consumers attract uploads.
    std::vector<std::size_t> rank_order(n);
    std::vector<double> cons_weights(n);
    const auto pick_consumer = [&](PeerId provider) -> PeerId {
        std::iota(rank_order.begin(), rank_order.end(), 0);
        std::stable_sort(rank_order.begin(), rank_order.end(),
                         [&](std::size_t a, std::size_t b) { return bci[a] < bci[b]; });
        std::fill(cons_weights.begin(), cons_weights.end(), 0.0);
        double rank = 0.0;
        for (const std::size_t peer : rank_order) {
            ++rank;
            if (peer != provider && can_consume(config.peer_profiles[peer])) {
                cons_weights[peer] = rank;
            }
        }
        return static_cast<PeerId>(weighted_pick(cons_weights, rng));
    };

    for (long t = 0; t < config.duration; ++t) {
        const PeerId provider = static_cast<PeerId>(weighted_pick(prov_weights, rng));
        const PeerId consumer = pick_consumer(provider);
        const double amount = uniform_range(rng, 1.0, 100.0);
        const double score = bci[consumer];
        const bool commit = score > threshold;
        if (commit) {
            ledger.record(provider, consumer, amount);
            m.uploaded_total[provider] += amount;
            m.downloaded_total[consumer] += amount;
            ++committed[consumer];
        } else {
            ++m.denied_downloads[consumer];
        }
        if (config.record_attempt_trace) {
            m.attempt_trace.push_back(AttemptRecord{t, consumer, provider, amount, score, commit});
        }
        if ((t + 1) % config.recompute_every == 0) {
            const SolveResult r =
                solve(ledger, BciParams{config.alpha, StoppingRule::four_decimals(), 10000});
            bci = r.x;
            m.bci_trajectories.push_back(RecomputePoint{t + 1, bci, m.uploaded_total,
                                                        m.downloaded_total, m.denied_downloads,
                                                        committed});
        }
    }

    m.imbalance.resize(n);
    KahanSum imb;
    for (std::size_t i = 0; i < n; ++i) {
        m.imbalance[i] = std::abs(m.uploaded_total[i] - m.downloaded_total[i]);
        imb.add(m.imbalance[i]);
    }
    m.mean_imbalance = imb.value() / static_cast<double>(n);

    double fr_down = 0.0, all_down = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        all_down += m.downloaded_total[i];
        if (config.peer_profiles[i].kind == PeerProfile::Kind::FreeRider) {
            fr_down += m.downloaded_total[i];
        }
    }
    m.free_rider_download_fraction = all_down == 0.0 ? 0.0 : fr_down / all_down;

    return SimOutcome{std::move(m), std::move(ledger)};
}

FairnessReport fairness_report(const ShareMatrix& ledger, double alpha,
                               const SimMetrics* metrics) {
    const SolveResult r = solve(ledger, BciParams{alpha, StoppingRule::inf_norm(1e-10), 100000});
    const LedgerSummary s = ledger.summary();
    const std::size_t n = ledger.peer_count();

    FairnessReport rep;
    double lo = r.x[0], hi = r.x[0];
    KahanSum imb;
    std::vector<double> net(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, r.x[i]);
        hi = std::max(hi, r.x[i]);
        net[i] = s.upload_totals[i] - s.download_totals[i];
        const double d = std::abs(net[i]);
        rep.max_imbalance = std::max(rep.max_imbalance, d);
        imb.add(d);
    }
    rep.mean_imbalance = imb.value() / static_cast<double>(n);
    rep.bci_dispersion = hi - lo;

    // Pearson correlation between converged score and net contribution.
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += r.x[i];
        my += net[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (r.x[i] - mx) * (net[i] - my);
        sxx += (r.x[i] - mx) * (r.x[i] - mx);
        syy += (net[i] - my) * (net[i] - my);
    }
    rep.correlation = (sxx == 0.0 || syy == 0.0) ? 0.0 : sxy / std::sqrt(sxx * syy);
    rep.correlation_sign = rep.correlation > 1e-12 ? 1 : (rep.correlation < -1e-12 ? -1 : 0);

    if (rep.bci_dispersion < 1e-6) {
        rep.uniform_balance_consistent = s.total == 0.0 || rep.max_imbalance < 1e-4 * s.total;
    }
    if (metrics) {
        // Simulation denials do not change the ledger view; nothing else to
        // merge, the totals are already the ledger's row/column sums.
        (void)metrics;
    }
    return rep;
}

SimConfig load_sim_config(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("sim config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("sim config: expected a JSON object");

    SimConfig c;
    const auto require = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw InvalidConfig(key, "missing");
        return j[key];
    };
    const json& jn = require("n");
    if (!jn.is_number_unsigned()) throw InvalidConfig("n", "must be a nonnegative integer");
    c.n = jn.get<std::size_t>();
    const json& ja = require("alpha");
    if (!ja.is_number()) throw InvalidConfig("alpha", "must be a number");
    c.alpha = ja.get<double>();
    if (j.contains("threshold")) {
        if (!j["threshold"].is_number()) throw InvalidConfig("threshold", "must be a number");
        c.threshold = j["threshold"].get<double>();
    }
    if (j.contains("recompute_every")) {
        if (!j["recompute_every"].is_number_integer()) {
            throw InvalidConfig("recompute_every", "must be an integer");
        }
        c.recompute_every = j["recompute_every"].get<int>();
    }
    const json& jd = require("duration");
    if (!jd.is_number_integer()) throw InvalidConfig("duration", "must be an integer");
    c.duration = jd.get<long>();
    const json& jp = require("peer_profiles");
    if (!jp.is_array()) throw InvalidConfig("peer_profiles", "must be an array");
    for (std::size_t i = 0; i < jp.size(); ++i) {
        c.peer_profiles.push_back(profile_from_json(jp[i], i));
    }
    if (j.contains("rng_seed")) {
        if (!j["rng_seed"].is_number_unsigned()) {
            throw InvalidConfig("rng_seed", "must be a nonnegative integer");
        }
        c.rng_seed = j["rng_seed"].get<std::uint64_t>();
    }
    if (j.contains("record_attempt_trace")) {
        if (!j["record_attempt_trace"].is_boolean()) {
            throw InvalidConfig("record_attempt_trace", "must be a boolean");
        }
        c.record_attempt_trace = j["record_attempt_trace"].get<bool>();
    }
    c.validate();
    return c;
}

SimConfig load_sim_config_string(const std::string& text) {
    std::istringstream is(text);
    return load_sim_config(is);
}

std::string to_json(const SimConfig& config) {
    json profiles = json::array();
    for (const PeerProfile& p : config.peer_profiles) {
        if (p.kind == PeerProfile::Kind::Cooperative) {
            profiles.push_back({{"kind", "cooperative"}, {"generosity", p.generosity}});
        } else {
            profiles.push_back(profile_kind_name(p.kind));
        }
    }
    const json doc = {
        {"n", config.n},
        {"alpha", config.alpha},
        {"threshold", config.effective_threshold()},
        {"recompute_every", config.recompute_every},
        {"duration", config.duration},
        {"peer_profiles", profiles},
        {"rng_seed", config.rng_seed},
        {"record_attempt_trace", config.record_attempt_trace},
    };
    return doc.dump();
}

std::string to_json(const SimMetrics& metrics) {
    json points = json::array();
    for (const RecomputePoint& p : metrics.bci_trajectories) {
        points.push_back({{"attempts", p.attempts},
                          {"bci", p.bci},
                          {"uploaded", p.uploaded},
                          {"downloaded", p.downloaded},
                          {"denied", p.denied},
                          {"committed_downloads", p.committed_downloads}});
    }
    json doc = {
        {"uploaded_total", metrics.uploaded_total},
        {"downloaded_total", metrics.downloaded_total},
        {"imbalance", metrics.imbalance},
        {"denied_downloads", metrics.denied_downloads},
        {"mean_imbalance", metrics.mean_imbalance},
        {"free_rider_download_fraction", metrics.free_rider_download_fraction},
        {"bci_trajectories", points},
    };
    if (!metrics.attempt_trace.empty()) {
        json trace = json::array();
        for (const AttemptRecord& a : metrics.attempt_trace) {
            trace.push_back({{"index", a.index},
                             {"consumer", a.consumer},
                             {"provider", a.provider},
                             {"amount", a.amount},
                             {"consumer_bci", a.consumer_bci},
                             {"committed", a.committed}});
        }
        doc["attempt_trace"] = trace;
    }
    return doc.dump();
}

std::string to_json(const FairnessReport& report) {
    const json doc = {
        {"mean_imbalance", report.mean_imbalance},
        {"max_imbalance", report.max_imbalance},
        {"bci_dispersion", report.bci_dispersion},
        {"correlation", report.correlation},
        {"correlation_sign", report.correlation_sign},
        {"uniform_balance_consistent", report.uniform_balance_consistent},
    };
    return doc.dump();
}

void write_trajectories_csv(std::ostream& out, const SimMetrics& metrics) {
    out << "step,peer,bci,uploaded,downloaded,denied\n";
    for (const RecomputePoint& p : metrics.bci_trajectories) {
        for (std::size_t i = 0; i < p.bci.size(); ++i) {
            out << p.attempts << ',' << i << ',' << fmt17(p.bci[i]) << ',' << fmt17(p.uploaded[i])
                << ',' << fmt17(p.downloaded[i]) << ',' << p.denied[i] << '\n';
        }
    }
}

}  // namespace bci
