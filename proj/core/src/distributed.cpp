#include "bci/distributed.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "json.hpp"

#include "bci/errors.hpp"
#include "bci/numeric.hpp"
#include "bci/rng.hpp"

namespace bci {
namespace {

// One (manager, subject) score record. The cache holds the latest received
// score of every peer; only the subject's transaction counterparts are read.
struct Record {
    PeerId subject;
    PeerId manager;
    double stored;
    double last_broadcast;
    std::vector<double> cache;
};

struct QueueEntry {
    ManagerMessage msg;
    std::uint64_t seq;  // FIFO among equal delivery ticks
};

struct QueueOrder {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.msg.virtual_time != b.msg.virtual_time) {
            return a.msg.virtual_time > b.msg.virtual_time;
        }
        return a.seq > b.seq;
    }
};

class Network {
public:
    explicit Network(std::vector<ManagerMessage>* trace) : trace_(trace) {}

    void enqueue(MessageKind kind, PeerId from, PeerId to, PeerId subject,
                 std::optional<double> value, std::uint64_t deliver_at) {
        ManagerMessage m{kind, from, to, subject, value, deliver_at};
        ++total_;
        ++by_kind_[kind];
        if (trace_) trace_->push_back(m);
        queue_.push(QueueEntry{std::move(m), seq_++});
    }

    bool has_due(std::uint64_t now) const {
        return !queue_.empty() && queue_.top().msg.virtual_time <= now;
    }
    bool empty() const { return queue_.empty(); }

    ManagerMessage pop() {
        ManagerMessage m = queue_.top().msg;
        queue_.pop();
        return m;
    }

    std::uint64_t total() const { return total_; }
    const std::map<MessageKind, std::uint64_t>& by_kind() const { return by_kind_; }

private:
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> queue_;
    std::vector<ManagerMessage>* trace_;
    std::uint64_t seq_ = 0;
    std::uint64_t total_ = 0;
    std::map<MessageKind, std::uint64_t> by_kind_;
};

}  // namespace

ManagerAssignment assign_managers(std::size_t n, int replication, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("assign_managers: need at least 2 peers");
    if (replication < 1 || static_cast<std::size_t>(replication) > n - 1) {
        throw ReplicationTooLarge("replication " + std::to_string(replication) +
                                  " not in [1, " + std::to_string(n - 1) + "]");
    }
    ManagerAssignment a;
    a.replication = replication;
    a.managers_of.resize(n);
    std::mt19937_64 rng(seed);
    std::vector<ManagerId> others(n - 1);
    for (PeerId p = 0; p < n; ++p) {
        // A peer never manages its own record.
        std::size_t k = 0;
        for (PeerId q = 0; q < n; ++q) {
            if (q != p) others[k++] = q;
        }
        a.managers_of[p] = sample_distinct(others, static_cast<std::size_t>(replication), rng);
    }
    return a;
}

const char* message_kind_name(MessageKind k) {
    switch (k) {
        case MessageKind::QueryBci: return "QueryBci";
        case MessageKind::BciReply: return "BciReply";
        case MessageKind::UpdateNotify: return "UpdateNotify";
        case MessageKind::VoteRequest: return "VoteRequest";
        case MessageKind::VoteReply: return "VoteReply";
    }
    return "?";
}

VoteOutcome resolve_conflict(const std::vector<std::pair<ManagerId, double>>& reports,
                             int rounding_decimals) {
    if (reports.empty()) {
        throw std::invalid_argument("resolve_conflict: reports must be nonempty");
    }
    std::map<long long, std::size_t> counts;
    for (const auto& [mgr, value] : reports) {
        ++counts[round_scaled(value, rounding_decimals)];
    }
    const double scale = pow10i(rounding_decimals);
    if (counts.size() == 1) {
        return {VoteKind::Agreed, static_cast<double>(counts.begin()->first) / scale};
    }
    for (const auto& [key, count] : counts) {
        if (2 * count > reports.size()) {
            return {VoteKind::Majority, static_cast<double>(key) / scale};
        }
    }
    return {VoteKind::NoMajority, 0.0};
}

DistRunReport run_distributed(const ShareMatrix& ledger, const BciParams& params,
                              const ManagerAssignment& assignment, const Schedule& schedule,
                              int delay_ticks, std::vector<ManagerMessage>* trace) {
    const std::size_t n = ledger.peer_count();
    if (assignment.managers_of.size() != n) {
        throw DimensionMismatch("run_distributed: assignment covers " +
                                std::to_string(assignment.managers_of.size()) + " peers, ledger has " +
                                std::to_string(n));
    }
    if (delay_ticks < 0) throw std::invalid_argument("run_distributed: delay_ticks must be >= 0");
    if (params.max_iterations < 1) {
        throw std::invalid_argument("run_distributed: max_iterations must be at least 1");
    }
    const double neutral = neutral_bci(params.alpha);
    const double alpha = params.alpha;
    const double eps = params.stopping.change_eps();
    const std::uint64_t delay = static_cast<std::uint64_t>(delay_ticks);

    // Column view of the ledger, in fixed row-major order.
    std::vector<std::vector<std::pair<PeerId, double>>> cols(n);
    for (PeerId i = 0; i < n; ++i) {
        for (const auto& [j, v] : ledger.row(i)) cols[j].emplace_back(i, v);
    }

    std::vector<Record> records;
    std::vector<std::vector<std::size_t>> records_of_manager(n);
    std::vector<std::vector<PeerId>> counterparts(n);
    for (PeerId i = 0; i < n; ++i) {
        std::set<PeerId> cp;
        for (const auto& [j, v] : ledger.row(i)) cp.insert(j);
        for (const auto& [j, v] : cols[i]) cp.insert(j);
        counterparts[i].assign(cp.begin(), cp.end());
        for (const ManagerId m : assignment.managers_of[i]) {
            records_of_manager[m].push_back(records.size());
            records.push_back(Record{i, m, neutral, neutral, std::vector<double>(n, neutral)});
        }
    }

    // Managers that cache peer i's score: the managers of every peer that
    // transacts with i. Broadcast targets for i's updates.
    std::vector<std::vector<ManagerId>> watchers(n);
    {
        std::vector<std::set<ManagerId>> w(n);
        for (PeerId k = 0; k < n; ++k) {
            for (const PeerId j : counterparts[k]) {
                for (const ManagerId m : assignment.managers_of[k]) w[j].insert(m);
            }
        }
        for (PeerId i = 0; i < n; ++i) watchers[i].assign(w[i].begin(), w[i].end());
    }

    const auto eq1_rhs = [&](const Record& rec) {
        KahanSum up, down;
        for (const auto& [j, v] : ledger.row(rec.subject)) up.add(v * rec.cache[j]);
        for (const auto& [j, v] : cols[rec.subject]) down.add(v * rec.cache[j]);
        const double denom = up.value() + down.value();
        return denom == 0.0 ? neutral : alpha * up.value() / denom + (1.0 - alpha);
    };

    Network net(trace);
    const auto apply_value = [&](ManagerId owner, PeerId subject, double value) {
        for (const std::size_t idx : records_of_manager[owner]) {
            records[idx].cache[subject] = value;
        }
    };
    const auto deliver_due = [&](std::uint64_t now) {
        while (net.has_due(now)) {
            const ManagerMessage m = net.pop();
            switch (m.kind) {
                case MessageKind::QueryBci: {
                    // Answered by the queried manager from its own record.
                    for (const std::size_t idx : records_of_manager[m.to]) {
                        if (records[idx].subject == m.subject) {
                            net.enqueue(MessageKind::BciReply, m.to, m.from, m.subject,
                                        records[idx].stored, m.virtual_time + delay);
                            break;
                        }
                    }
                    break;
                }
                case MessageKind::BciReply:
                case MessageKind::UpdateNotify:
                    apply_value(m.to, m.subject, *m.value);
                    break;
                default:
                    break;  // vote traffic carries no state changes here
            }
        }
    };

    // Initial pull: every record queries the primary manager of each of its
    // subject's counterparts.
    std::uint64_t now = 0;
    for (const Record& rec : records) {
        for (const PeerId j : counterparts[rec.subject]) {
            net.enqueue(MessageKind::QueryBci, rec.manager, assignment.managers_of[j][0], j,
                        std::nullopt, delay);
        }
    }

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 sched_rng(schedule.seed);

    int rounds = 0;
    bool quiescent = false;
    while (rounds < params.max_iterations && !quiescent) {
        if (schedule.kind == Schedule::Kind::RandomOrder) {
            shuffle_in_place(order, sched_rng);
        }
        bool changed = false;
        for (const std::size_t idx : order) {
            deliver_due(now);
            Record& rec = records[idx];
            const double y = eq1_rhs(rec);
            if (std::abs(y - rec.stored) >= eps) changed = true;
            rec.stored = y;
            if (std::abs(y - rec.last_broadcast) >= eps) {
                for (const ManagerId w : watchers[rec.subject]) {
                    if (w == rec.manager) {
                        apply_value(w, rec.subject, y);  // local table, no message
                    } else {
                        net.enqueue(MessageKind::UpdateNotify, rec.manager, w, rec.subject, y,
                                    now + delay);
                    }
                }
                rec.last_broadcast = y;
            }
            ++now;
        }
        ++rounds;
        // In-flight messages can still change caches; only an idle network
        // with a stable sweep counts as converged.
        quiescent = !changed && net.empty();
    }

    DistRunReport report;
    report.rounds = rounds;
    if (!quiescent) report.warnings.insert(SolveWarning::HitIterationCap);

    // Read-out: collect each peer's replicas and settle them by vote. With a
    // single replica a plain query suffices.
    report.x.resize(n, neutral);
    for (PeerId i = 0; i < n; ++i) {
        std::vector<std::pair<ManagerId, double>> reports;
        for (const ManagerId m : assignment.managers_of[i]) {
            for (const std::size_t idx : records_of_manager[m]) {
                if (records[idx].subject == i) {
                    reports.emplace_back(m, records[idx].stored);
                    break;
                }
            }
        }
        if (reports.size() == 1) {
            net.enqueue(MessageKind::QueryBci, i, reports[0].first, i, std::nullopt, now + delay);
            net.enqueue(MessageKind::BciReply, reports[0].first, i, i, reports[0].second,
                        now + 2 * delay);
            report.x[i] = reports[0].second;
            continue;
        }
        for (const auto& [m, v] : reports) {
            net.enqueue(MessageKind::VoteRequest, i, m, i, std::nullopt, now + delay);
            net.enqueue(MessageKind::VoteReply, m, i, i, v, now + 2 * delay);
        }
        const VoteOutcome vote = resolve_conflict(reports, 6);
        if (vote.kind == VoteKind::NoMajority) {
            report.x[i] = reports[0].second;
        } else {
            // Full precision value from the lowest-slot manager in the
            // winning group.
            for (const auto& [m, v] : reports) {
                if (round_scaled(v, 6) == round_scaled(vote.value, 6)) {
                    report.x[i] = v;
                    break;
                }
            }
        }
    }
    while (!net.empty()) net.pop();  // read-out traffic needs no processing

    report.messages_total = net.total();
    report.messages_by_kind = net.by_kind();
    for (const MessageKind k :
         {MessageKind::QueryBci, MessageKind::BciReply, MessageKind::UpdateNotify,
          MessageKind::VoteRequest, MessageKind::VoteReply}) {
        report.messages_by_kind.try_emplace(k, 0);
    }

    const SolveResult central = solve(ledger, params);
    report.divergence_from_centralized = inf_norm_diff(report.x, central.x);
    report.warnings.insert(central.warnings.begin(), central.warnings.end());
    return report;
}

std::string to_json(const DistRunReport& report) {
    nlohmann::json by_kind;
    for (const auto& [k, c] : report.messages_by_kind) by_kind[message_kind_name(k)] = c;
    nlohmann::json warnings = nlohmann::json::array();
    for (const SolveWarning w : report.warnings) warnings.push_back(warning_name(w));
    const nlohmann::json doc = {
        {"x", report.x},
        {"rounds", report.rounds},
        {"messages_total", report.messages_total},
        {"messages_by_kind", by_kind},
        {"divergence_from_centralized", report.divergence_from_centralized},
        {"warnings", warnings},
    };
    return doc.dump();
}

void write_message_trace_csv(std::ostream& out, const std::vector<ManagerMessage>& trace) {
    out << "tick,kind,from,to,subject,value\n";
    char buf[40];
    for (const ManagerMessage& m : trace) {
        out << m.virtual_time << ',' << message_kind_name(m.kind) << ',' << m.from << ',' << m.to
            << ',' << m.subject << ',';
        if (m.value) {
            std::snprintf(buf, sizeof buf, "%.17g", *m.value);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace bci
