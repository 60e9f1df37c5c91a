#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bci/solver.hpp"

namespace bci {

using ManagerId = PeerId;  // index managers are themselves peers

// Which peers hold each peer's score record. Every peer gets exactly
// `replication` distinct managers, never including itself.
struct ManagerAssignment {
    int replication = 1;
    std::vector<std::vector<ManagerId>> managers_of;  // [peer] -> r manager ids
};

ManagerAssignment assign_managers(std::size_t n, int replication, std::uint64_t seed);

enum class MessageKind { QueryBci, BciReply, UpdateNotify, VoteRequest, VoteReply };

const char* message_kind_name(MessageKind k);

// Envelope on the virtual network. virtual_time is the delivery tick.
struct ManagerMessage {
    MessageKind kind;
    PeerId from = 0;
    PeerId to = 0;
    PeerId subject = 0;
    std::optional<double> value;  // present iff BciReply, VoteReply or UpdateNotify
    std::uint64_t virtual_time = 0;
};

struct Schedule {
    enum class Kind { RoundRobin, RandomOrder };
    Kind kind = Kind::RoundRobin;
    std::uint64_t seed = 0;

    static Schedule round_robin() { return {Kind::RoundRobin, 0}; }
    static Schedule random_order(std::uint64_t seed) { return {Kind::RandomOrder, seed}; }
};

struct DistRunReport {
    BciVector x;                     // consensus values after voting
    int rounds = 0;                  // manager sweeps executed
    std::uint64_t messages_total = 0;
    std::map<MessageKind, std::uint64_t> messages_by_kind;
    double divergence_from_centralized = 0.0;  // inf-norm vs the centralized solve
    std::set<SolveWarning> warnings;
};

// Runs the manager protocol to quiescence on a virtual clock: each manager
// keeps a cached copy of its subject's transaction counterparts' scores,
// recomputes the subject's score from the cache once per sweep, and pushes
// changed values to the managers that cache them. delay_ticks is the
// message latency. The run is single-threaded and deterministic.
//
// If `trace` is non-null, every enqueued message is appended to it.
DistRunReport run_distributed(const ShareMatrix& ledger, const BciParams& params,
                              const ManagerAssignment& assignment, const Schedule& schedule,
                              int delay_ticks, std::vector<ManagerMessage>* trace = nullptr);

enum class VoteKind { Agreed, Majority, NoMajority };

struct VoteOutcome {
    VoteKind kind = VoteKind::NoMajority;
    double value = 0.0;  // rounded winning value; meaningless for NoMajority
};

// Settles conflicting manager reports: values are compared after rounding to
// rounding_decimals; Agreed when all match, Majority when a strict majority
// does.
VoteOutcome resolve_conflict(const std::vector<std::pair<ManagerId, double>>& reports,
                             int rounding_decimals);

std::string to_json(const DistRunReport& report);

// Debug trace: one line per message, "tick,kind,from,to,subject,value".
void write_message_trace_csv(std::ostream& out, const std::vector<ManagerMessage>& trace);

}  // namespace bci
