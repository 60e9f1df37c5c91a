#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "bci/distributed.hpp"
#include "bci/errors.hpp"
#include "bci/numeric.hpp"
#include "support.hpp"

using namespace bci;
using namespace testsupport;

TEST_CASE("manager assignment structure") {
    const ManagerAssignment a = assign_managers(4, 1, 7);
    REQUIRE(a.managers_of.size() == 4);
    for (PeerId p = 0; p < 4; ++p) {
        REQUIRE(a.managers_of[p].size() == 1);
        CHECK(a.managers_of[p][0] != p);
    }
}

TEST_CASE("full replication uses every other peer") {
    const ManagerAssignment a = assign_managers(4, 3, 11);
    for (PeerId p = 0; p < 4; ++p) {
        std::set<ManagerId> s(a.managers_of[p].begin(), a.managers_of[p].end());
        CHECK(s.size() == 3);
        CHECK(s.count(p) == 0);
    }
}

TEST_CASE("assignment is deterministic per seed") {
    const ManagerAssignment a = assign_managers(12, 3, 99);
    const ManagerAssignment b = assign_managers(12, 3, 99);
    const ManagerAssignment c = assign_managers(12, 3, 100);
    CHECK(a.managers_of == b.managers_of);
    CHECK(a.managers_of != c.managers_of);
}

TEST_CASE("replication bounds") {
    CHECK_THROWS_AS(assign_managers(2, 2, 0), ReplicationTooLarge);
    CHECK_THROWS_AS(assign_managers(5, 0, 0), ReplicationTooLarge);
    CHECK_THROWS_AS(assign_managers(5, 5, 0), ReplicationTooLarge);
}

TEST_CASE("resolve_conflict examples") {
    const int d = 6;
    auto vote = resolve_conflict({{0, 0.7210}, {1, 0.7210}, {2, 0.7210}}, d);
    CHECK(vote.kind == VoteKind::Agreed);
    CHECK(vote.value == doctest::Approx(0.7210));

    vote = resolve_conflict({{0, 0.7210}, {1, 0.7210}, {2, 0.9000}}, d);
    CHECK(vote.kind == VoteKind::Majority);
    CHECK(vote.value == doctest::Approx(0.7210));

    vote = resolve_conflict({{0, 0.1}, {1, 0.2}, {2, 0.3}}, d);
    CHECK(vote.kind == VoteKind::NoMajority);

    CHECK_THROWS_AS(resolve_conflict({}, d), std::invalid_argument);
}

TEST_CASE("rounding merges nearby reports before voting") {
    // differ only at the 7th decimal: identical after rounding to 6
    const auto vote = resolve_conflict({{0, 0.12345678}, {1, 0.12345691}}, 6);
    CHECK(vote.kind == VoteKind::Agreed);
}

TEST_CASE("voting matches the strict-majority oracle for all sizes up to 9") {
    // value alphabet of three distinct rounded values
    const double values[3] = {0.1, 0.2, 0.3};
    for (int size = 1; size <= 9; ++size) {
        const int combos = static_cast<int>(std::pow(3, size));
        for (int code = 0; code < combos; ++code) {
            std::vector<std::pair<ManagerId, double>> reports;
            int counts[3] = {0, 0, 0};
            int c = code;
            for (int k = 0; k < size; ++k) {
                const int pick = c % 3;
                c /= 3;
                ++counts[pick];
                reports.emplace_back(static_cast<ManagerId>(k), values[pick]);
            }
            const auto vote = resolve_conflict(reports, 6);
            const int top = *std::max_element(counts, counts + 3);
            if (top == size) {
                CHECK(vote.kind == VoteKind::Agreed);
            } else if (2 * top > size) {
                CHECK(vote.kind == VoteKind::Majority);
            } else {
                CHECK(vote.kind == VoteKind::NoMajority);
            }
        }
    }
}

TEST_CASE("distributed run matches the centralized fixed point on the 4-peer ledger") {
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(4, 1, 3);
    const DistRunReport r =
        run_distributed(m, params, a, Schedule::round_robin(), 0);
    CHECK(r.divergence_from_centralized < 1e-6);
    CHECK(r.warnings.empty());
    CHECK(r.rounds > 0);
}

TEST_CASE("all-zero ledger settles in the first sweep") {
    const ShareMatrix zeros(5);
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(5, 2, 1);
    const DistRunReport r = run_distributed(zeros, params, a, Schedule::round_robin(), 0);
    CHECK(r.rounds == 1);  // no update sweeps beyond the first
    for (const double v : r.x) CHECK(v == 0.6);
    CHECK(r.messages_by_kind.at(MessageKind::UpdateNotify) == 0);
}

TEST_CASE("free rider converges to the exact floor on every manager") {
    ShareMatrix m(4);
    m.record(0, 1, 30.0);  // peer 1 downloads only
    m.record(2, 0, 10.0);
    m.record(0, 2, 10.0);
    m.record(2, 3, 8.0);
    m.record(3, 2, 8.0);
    const double alpha = 0.8;
    const BciParams params{alpha, StoppingRule::inf_norm(1e-10), 10000};
    const ManagerAssignment a = assign_managers(4, 3, 5);
    const DistRunReport r = run_distributed(m, params, a, Schedule::round_robin(), 0);
    CHECK(r.x[1] == 1.0 - alpha);
}

TEST_CASE("message accounting matches the enqueue trace") {
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(4, 2, 9);
    std::vector<ManagerMessage> trace;
    const DistRunReport r =
        run_distributed(m, params, a, Schedule::round_robin(), 1, &trace);
    CHECK(r.messages_total == trace.size());
    std::uint64_t by_kind_sum = 0;
    for (const auto& [kind, count] : r.messages_by_kind) by_kind_sum += count;
    CHECK(r.messages_total == by_kind_sum);
    std::map<MessageKind, std::uint64_t> recount;
    for (const ManagerMessage& msg : trace) ++recount[msg.kind];
    for (const auto& [kind, count] : recount) {
        CHECK(r.messages_by_kind.at(kind) == count);
    }
    // a value travels exactly on replies and notifies
    for (const ManagerMessage& msg : trace) {
        const bool carries = msg.kind == MessageKind::BciReply ||
                             msg.kind == MessageKind::VoteReply ||
                             msg.kind == MessageKind::UpdateNotify;
        CHECK(msg.value.has_value() == carries);
    }
}

TEST_CASE("equivalence with the centralized solve on random irreducible ledgers") {
    std::mt19937_64 rng(60);
    const double eps = 1e-9;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + uniform_index(rng, 18);
        const Dense d = random_irreducible_dense(rng, n, uniform_range(rng, 0.15, 0.7));
        const double alpha = uniform_range(rng, 0.2, 0.9);
        const BciParams params{alpha, StoppingRule::inf_norm(eps), 10000};
        const ManagerAssignment a = assign_managers(n, 1, trial);
        const DistRunReport r =
            run_distributed(from_dense(d), params, a, Schedule::round_robin(), 0);
        INFO("trial ", trial, " n=", n, " alpha=", alpha);
        CHECK(r.divergence_from_centralized < 10.0 * eps);
    }
}

TEST_CASE("round-robin and random order reach the same limit") {
    std::mt19937_64 rng(61);
    const double eps = 1e-9;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + uniform_index(rng, 12);
        const Dense d = random_irreducible_dense(rng, n, 0.4);
        const BciParams params{0.8, StoppingRule::inf_norm(eps), 10000};
        const ManagerAssignment a = assign_managers(n, 2, trial);
        const DistRunReport rr =
            run_distributed(from_dense(d), params, a, Schedule::round_robin(), 1);
        const DistRunReport ro = run_distributed(from_dense(d), params, a,
                                                 Schedule::random_order(trial * 31 + 1), 1);
        CHECK(inf_norm_diff(rr.x, ro.x) < 10.0 * eps);
    }
}

TEST_CASE("latency stretches convergence but not the limit") {
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(4, 1, 3);
    const DistRunReport fast = run_distributed(m, params, a, Schedule::round_robin(), 0);
    const DistRunReport slow = run_distributed(m, params, a, Schedule::round_robin(), 5);
    CHECK(slow.rounds >= fast.rounds);
    CHECK(slow.divergence_from_centralized < 1e-6);
}

TEST_CASE("coarse stopping still reads out a consensus near the fixed point") {
    // four-decimal quiescence leaves replicas disagreeing below 1e-4, so the
    // read-out vote has to settle them
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::four_decimals(), 10000};
    const ManagerAssignment a = assign_managers(4, 3, 21);
    const DistRunReport r =
        run_distributed(m, params, a, Schedule::random_order(2), 2);
    CHECK(r.messages_by_kind.at(MessageKind::VoteRequest) == 12);
    CHECK(r.messages_by_kind.at(MessageKind::VoteReply) == 12);
    CHECK(r.divergence_from_centralized < 1e-3);
}

TEST_CASE("runs are deterministic per seed and schedule") {
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(4, 2, 17);
    const DistRunReport r1 =
        run_distributed(m, params, a, Schedule::random_order(5), 2);
    const DistRunReport r2 =
        run_distributed(m, params, a, Schedule::random_order(5), 2);
    CHECK(r1.x == r2.x);
    CHECK(r1.rounds == r2.rounds);
    CHECK(r1.messages_total == r2.messages_total);
    CHECK(to_json(r1) == to_json(r2));
}

TEST_CASE("report JSON carries the message breakdown") {
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(4, 1, 3);
    const DistRunReport r = run_distributed(m, params, a, Schedule::round_robin(), 0);
    const std::string j = to_json(r);
    CHECK(j.find("\"messages_total\"") != std::string::npos);
    CHECK(j.find("\"QueryBci\"") != std::string::npos);
    CHECK(j.find("\"divergence_from_centralized\"") != std::string::npos);
}

TEST_CASE("message trace CSV has one line per message") {
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(4, 1, 3);
    std::vector<ManagerMessage> trace;
    run_distributed(m, params, a, Schedule::round_robin(), 0, &trace);
    std::ostringstream os;
    write_message_trace_csv(os, trace);
    const std::string csv = os.str();
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == static_cast<long>(trace.size()) + 1);  // header + messages
    CHECK(csv.rfind("tick,kind,from,to,subject,value\n", 0) == 0);
}

TEST_CASE("assignment size must match the ledger") {
    const ShareMatrix m = golden_matrix();
    const BciParams params{0.8, StoppingRule::inf_norm(1e-9), 10000};
    const ManagerAssignment a = assign_managers(6, 1, 3);
    CHECK_THROWS_AS(run_distributed(m, params, a, Schedule::round_robin(), 0),
                    DimensionMismatch);
}
