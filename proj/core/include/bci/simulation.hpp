#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bci/share_matrix.hpp"
#include "bci/solver.hpp"

namespace bci {

struct PeerProfile {
    enum class Kind { Cooperative, FreeRider, PureContributor };

    Kind kind = Kind::Cooperative;
    double generosity = 1.0;  // Cooperative only: relative upload activity

    static PeerProfile cooperative(double generosity = 1.0) {
        return {Kind::Cooperative, generosity};
    }
    static PeerProfile free_rider() { return {Kind::FreeRider, 0.0}; }
    static PeerProfile pure_contributor() { return {Kind::PureContributor, 0.0}; }
};

struct SimConfig {
    std::size_t n = 0;
    double alpha = 0.8;
    double threshold = -1.0;  // < 0 selects default_threshold(alpha)
    int recompute_every = 50;
    long duration = 1000;  // total attempted transactions
    std::vector<PeerProfile> peer_profiles;
    std::uint64_t rng_seed = 0;
    bool record_attempt_trace = false;

    // Strictly above the free-rider floor, below neutral.
    static double default_threshold(double alpha) { return 1.0 - alpha + 0.05 * alpha; }

    double effective_threshold() const {
        return threshold < 0.0 ? default_threshold(alpha) : threshold;
    }

    void validate() const;  // throws InvalidConfig naming the offending field
};

struct AttemptRecord {
    long index = 0;
    PeerId consumer = 0;
    PeerId provider = 0;
    double amount = 0.0;
    double consumer_bci = 0.0;  // score the admission check saw
    bool committed = false;
};

// Snapshot taken right after each periodic solve. All columns cumulative.
struct RecomputePoint {
    long attempts = 0;
    BciVector bci;
    std::vector<double> uploaded;
    std::vector<double> downloaded;
    std::vector<long> denied;
    std::vector<long> committed_downloads;
};

struct SimMetrics {
    std::vector<double> uploaded_total;
    std::vector<double> downloaded_total;
    std::vector<double> imbalance;  // |uploaded - downloaded| per peer
    std::vector<long> denied_downloads;
    double mean_imbalance = 0.0;
    double free_rider_download_fraction = 0.0;
    std::vector<RecomputePoint> bci_trajectories;
    std::vector<AttemptRecord> attempt_trace;  // only when requested
};

struct SimOutcome {
    SimMetrics metrics;
    ShareMatrix ledger;
};

// Deterministic under rng_seed. Draws (provider, consumer, amount) per
// attempt, commits iff the consumer's current score exceeds the threshold,
// and re-solves every recompute_every attempts.
SimOutcome run_simulation(const SimConfig& config);

struct FairnessReport {
    double mean_imbalance = 0.0;
    double max_imbalance = 0.0;
    double bci_dispersion = 0.0;   // max - min of the converged scores
    double correlation = 0.0;      // Pearson r of score vs (upload - download)
    int correlation_sign = 0;      // -1, 0 or +1
    bool uniform_balance_consistent = true;  // uniform scores imply balanced totals
};

// Scores the ledger at alpha and relates the converged scores to the
// per-peer upload/download totals. `metrics` is optional context from a
// simulation run; totals always come from the ledger itself.
FairnessReport fairness_report(const ShareMatrix& ledger, double alpha,
                               const SimMetrics* metrics = nullptr);

SimConfig load_sim_config(std::istream& in);
SimConfig load_sim_config_string(const std::string& text);
std::string to_json(const SimConfig& config);
std::string to_json(const SimMetrics& metrics);
std::string to_json(const FairnessReport& report);

// One line per (recompute, peer): "step,peer,bci,uploaded,downloaded,denied".
void write_trajectories_csv(std::ostream& out, const SimMetrics& metrics);

}  // namespace bci
