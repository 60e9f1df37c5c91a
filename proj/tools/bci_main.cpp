// Command-line front end: solve and sweep ledgers, check the solver's
// analytic guarantees of the scoring map, and drive the two simulators.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bci/distributed.hpp"
#include "bci/errors.hpp"
#include "bci/ledger_io.hpp"
#include "bci/numeric.hpp"
#include "bci/simulation.hpp"
#include "bci/solver.hpp"

namespace {

struct CommonSolveFlags {
    std::string matrix_path;
    double alpha = 0.8;
    std::string stopping = "four-dp";
    double eps = 1e-8;
    int max_iter = 10000;
};

bci::StoppingRule make_stopping(const std::string& name, double eps) {
    if (name == "four-dp") return bci::StoppingRule::four_decimals();
    return bci::StoppingRule::inf_norm(eps);
}

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("BCI_SEED");
    if (!s || !*s) return std::nullopt;
    return std::strtoull(s, nullptr, 10);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bci::Error("cannot open output file: " + path);
    out << content;
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", bci::round_half_away(v, 4));
    return buf;
}

void print_iteration_table(const bci::SolveResult& r) {
    std::printf("%-5s", "i");
    for (std::size_t i = 0; i < r.x.size(); ++i) std::printf(" %8zu", i + 1);
    std::printf("\n");
    for (std::size_t t = 0; t < r.history.size(); ++t) {
        std::printf("x^%-3zu", t);
        for (const double v : r.history[t]) std::printf(" %8s", fmt4(v).c_str());
        std::printf("\n");
    }
}

void print_warnings(const std::set<bci::SolveWarning>& warnings) {
    for (const bci::SolveWarning w : warnings) {
        std::printf("warning: %s\n", bci::warning_name(w));
    }
}

int cmd_solve(const CommonSolveFlags& f, const std::string& out_path) {
    const bci::ShareMatrix ledger = bci::load_ledger_file(f.matrix_path);
    const bci::BciParams params{f.alpha, make_stopping(f.stopping, f.eps), f.max_iter};
    const bci::SolveResult r = bci::solve(ledger, params);

    print_iteration_table(r);
    std::printf("iterations: %d\n", r.iterations);
    print_warnings(r.warnings);
    if (!out_path.empty()) write_file(out_path, bci::to_json(r) + "\n");
    return 0;
}

int cmd_sweep(const CommonSolveFlags& f, const std::vector<double>& alphas,
              const std::string& out_path) {
    const bci::ShareMatrix ledger = bci::load_ledger_file(f.matrix_path);
    const auto entries = bci::sweep_alpha(ledger, alphas, make_stopping(f.stopping, f.eps));
    std::string csv = "alpha,iterations\n";
    for (const bci::SweepEntry& e : entries) {
        char line[64];
        std::snprintf(line, sizeof line, "%g,%d\n", e.alpha, e.iterations);
        csv += line;
    }
    std::fputs(csv.c_str(), stdout);
    if (!out_path.empty()) write_file(out_path, csv);
    return 0;
}

int cmd_verify(const CommonSolveFlags& f, double tol) {
    const bci::ShareMatrix ledger = bci::load_ledger_file(f.matrix_path);
    const bci::BciParams params{f.alpha, bci::StoppingRule::inf_norm(1e-10), 100000};
    const bci::SolveResult r = bci::solve(ledger, params);
    print_warnings(r.warnings);
    bool ok = true;

    const double floor = bci::min_bci(f.alpha);
    bool bounds = true;
    for (const double v : r.x) {
        if (v < floor - 1e-12 || v > bci::max_bci() + 1e-12) bounds = false;
    }
    std::printf("bounds [%.4f, 1]: %s\n", floor, bounds ? "PASS" : "FAIL");
    ok = ok && bounds;

    const double resid = bci::inf_norm_diff(r.x, bci::phi_step(ledger, r.x, f.alpha));
    const double last = r.residuals.empty() ? 0.0 : r.residuals.back();
    const bool fp_ok = last == 0.0 ? resid == 0.0 : resid < 2.0 * last;
    std::printf("fixed-point residual: %s (|x - phi(x)| = %.3g, last step = %.3g)\n",
                fp_ok ? "PASS" : "FAIL", resid, last);
    ok = ok && fp_ok;

    const bci::UniformCheck u = bci::verify_uniform_solution(ledger, f.alpha, tol);
    switch (u.status) {
        case bci::UniformStatus::NotUniform:
            std::printf("uniform/balance: NOT-APPLICABLE (NotUniform)\n");
            break;
        case bci::UniformStatus::UniformAndBalanced:
            std::printf("uniform/balance: PASS\n");
            break;
        case bci::UniformStatus::UniformOnly:
            std::printf("uniform/balance: FAIL (max imbalance = %.3g)\n", u.max_imbalance);
            ok = false;
            break;
    }
    return ok ? 0 : 1;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& csv_path) {
    std::ifstream in(config_path);
    if (!in) throw bci::Error("cannot open config file: " + config_path);
    bci::SimConfig config = bci::load_sim_config(in);
    if (const auto seed = env_seed()) config.rng_seed = *seed;

    const bci::SimOutcome out = bci::run_simulation(config);
    const bci::FairnessReport fairness =
        bci::fairness_report(out.ledger, config.alpha, &out.metrics);

    std::printf("attempts: %ld, recomputes: %zu\n", config.duration,
                out.metrics.bci_trajectories.size());
    std::printf("mean imbalance: %.4f\n", out.metrics.mean_imbalance);
    std::printf("free-rider download fraction: %.6f\n",
                out.metrics.free_rider_download_fraction);
    std::printf("bci dispersion: %.6f\n", fairness.bci_dispersion);

    write_file(out_path, bci::to_json(out.metrics) + "\n");
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw bci::Error("cannot open output file: " + csv_path);
    bci::write_trajectories_csv(csv, out.metrics);
    return 0;
}

int cmd_distributed(const CommonSolveFlags& f, int replication, const std::string& schedule_name,
                    std::uint64_t schedule_seed, int delay, std::uint64_t assign_seed,
                    const std::string& out_path, const std::string& trace_path) {
    const bci::ShareMatrix ledger = bci::load_ledger_file(f.matrix_path);
    if (const auto seed = env_seed()) {
        assign_seed = *seed;
        schedule_seed = *seed;
    }
    const bci::ManagerAssignment assignment =
        bci::assign_managers(ledger.peer_count(), replication, assign_seed);
    const bci::Schedule schedule = schedule_name == "random"
                                       ? bci::Schedule::random_order(schedule_seed)
                                       : bci::Schedule::round_robin();
    const bci::BciParams params{f.alpha, make_stopping(f.stopping, f.eps), f.max_iter};

    std::vector<bci::ManagerMessage> trace;
    const bci::DistRunReport report =
        bci::run_distributed(ledger, params, assignment, schedule, delay,
                             trace_path.empty() ? nullptr : &trace);

    std::printf("rounds: %d\n", report.rounds);
    std::printf("messages: %llu", static_cast<unsigned long long>(report.messages_total));
    bool first = true;
    for (const auto& [kind, count] : report.messages_by_kind) {
        std::printf("%s%s=%llu", first ? " (" : ", ", bci::message_kind_name(kind),
                    static_cast<unsigned long long>(count));
        first = false;
    }
    std::printf(")\n");
    std::printf("divergence from centralized: %.3g\n", report.divergence_from_centralized);
    for (const bci::SolveWarning w : report.warnings) {
        std::printf("warning: %s\n", bci::warning_name(w));
    }

    if (!out_path.empty()) write_file(out_path, bci::to_json(report) + "\n");
    if (!trace_path.empty()) {
        std::ofstream tr(trace_path, std::ios::binary);
        if (!tr) throw bci::Error("cannot open output file: " + trace_path);
        bci::write_message_trace_csv(tr, trace);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biased contribution index toolkit"};
    app.require_subcommand(1);

    const auto open_unit = CLI::Validator(
        [](std::string& s) -> std::string {
            const double v = std::strtod(s.c_str(), nullptr);
            if (!(v > 0.0 && v < 1.0)) return "value must lie in the open interval (0, 1)";
            return {};
        },
        "FLOAT in (0,1)", "open_unit");

    CommonSolveFlags f;
    std::string out_path, csv_path, trace_path, config_path;
    std::vector<double> alphas;
    double tol = 1e-8;
    int replication = 1;
    std::string schedule_name = "round-robin";
    std::uint64_t seed = 1;
    int delay = 0;

    const auto add_matrix = [&](CLI::App* cmd) {
        cmd->add_option("matrix", f.matrix_path, "Ledger file (.csv dense, .json sparse)")
            ->required();
    };
    const auto add_solver_flags = [&](CLI::App* cmd) {
        cmd->add_option("--alpha", f.alpha, "Bias parameter in (0, 1)")
            ->check(open_unit)
            ->capture_default_str();
        cmd->add_option("--stopping", f.stopping, "Stopping rule")
            ->check(CLI::IsMember({"four-dp", "inf-norm"}))
            ->capture_default_str();
        cmd->add_option("--eps", f.eps, "Tolerance for inf-norm stopping")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--max-iter", f.max_iter, "Iteration cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    CLI::App* solve = app.add_subcommand("solve", "Solve one ledger and print the iterations");
    add_matrix(solve);
    add_solver_flags(solve);
    solve->add_option("--out", out_path, "Write the full-precision result JSON here");

    CLI::App* sweep = app.add_subcommand("sweep", "Iteration counts across alpha values");
    add_matrix(sweep);
    add_solver_flags(sweep);
    sweep->add_option("--alphas", alphas, "Comma-separated alpha values")
        ->required()
        ->delimiter(',')
        ->expected(1, -1);
    sweep->add_option("--out", out_path, "Also write the CSV here");

    CLI::App* verify = app.add_subcommand("verify", "Check the analytic guarantees of the scoring map");
    add_matrix(verify);
    verify->add_option("--alpha", f.alpha, "Bias parameter in (0, 1)")
        ->check(open_unit)
        ->capture_default_str();
    verify->add_option("--tol", tol, "Uniformity tolerance")->capture_default_str();

    CLI::App* simulate = app.add_subcommand("simulate", "Run an admission-control scenario");
    simulate->add_option("config", config_path, "SimConfig JSON file")->required();
    simulate->add_option("--out", out_path, "Metrics JSON path")
        ->capture_default_str()
        ->default_str("sim_metrics.json");
    simulate->add_option("--csv", csv_path, "Trajectories CSV path");

    CLI::App* distributed =
        app.add_subcommand("distributed", "Run the index-manager protocol on a ledger");
    add_matrix(distributed);
    add_solver_flags(distributed);
    distributed->add_option("--replication", replication, "Managers per peer")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    distributed->add_option("--schedule", schedule_name, "Manager activation order")
        ->check(CLI::IsMember({"round-robin", "random"}))
        ->capture_default_str();
    distributed->add_option("--delay", delay, "Message latency in ticks")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    distributed->add_option("--seed", seed, "Assignment/schedule seed")->capture_default_str();
    distributed->add_option("--out", out_path, "Report JSON path");
    distributed->add_option("--trace", trace_path, "Message trace CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*solve) return cmd_solve(f, out_path);
        if (*sweep) return cmd_sweep(f, alphas, out_path);
        if (*verify) return cmd_verify(f, tol);
        if (*simulate) {
            if (out_path.empty()) out_path = "sim_metrics.json";
            if (csv_path.empty()) {
                csv_path = out_path;
                const auto dot = csv_path.rfind('.');
                if (dot != std::string::npos) csv_path.resize(dot);
                csv_path += ".csv";
            }
            return cmd_simulate(config_path, out_path, csv_path);
        }
        if (*distributed) {
            return cmd_distributed(f, replication, schedule_name, seed, delay, seed, out_path,
                                   trace_path);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
