#include "bci/solver.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bci/errors.hpp"
#include "bci/numeric.hpp"

namespace bci {
namespace {

void check_alpha(double alpha) {
    // Endpoints are rejected: alpha = 0 ignores contributions entirely and
    // alpha = 1 removes the score floor.
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidAlpha("alpha must lie in the open interval (0, 1), got " +
                           std::to_string(alpha));
    }
}

bool stop_fired(const StoppingRule& rule, const BciVector& next, const BciVector& prev) {
    if (rule.kind == StoppingRule::Kind::FourDecimalEquality) {
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (round_scaled(next[i], 4) != round_scaled(prev[i], 4)) return false;
        }
        return true;
    }
    return inf_norm_diff(next, prev) < rule.eps;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_array(std::ostringstream& os, const std::vector<double>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << fmt17(v[i]);
    }
    os << ']';
}

}  // namespace

StoppingRule StoppingRule::inf_norm(double eps) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("InfNormTol: eps must be positive");
    }
    return {Kind::InfNormTol, eps};
}

double StoppingRule::change_eps() const {
    // Values equal at four decimals differ by less than one rounding quantum.
    return kind == Kind::FourDecimalEquality ? 0.5e-4 : eps;
}

const char* warning_name(SolveWarning w) {
    switch (w) {
        case SolveWarning::ReducibleMatrix: return "ReducibleMatrix";
        case SolveWarning::HitIterationCap: return "HitIterationCap";
    }
    return "?";
}

double min_bci(double alpha) {
    check_alpha(alpha);
    return 1.0 - alpha;
}

double max_bci() { return 1.0; }

double neutral_bci(double alpha) {
    check_alpha(alpha);
    return 1.0 - alpha / 2.0;
}

BciVector initial_vector(std::size_t n, double alpha) {
    check_alpha(alpha);
    if (n < 1) throw std::invalid_argument("initial_vector: n must be at least 1");
    return BciVector(n, 1.0 - alpha / 2.0);
}

BciVector phi_step(const ShareMatrix& ledger, const BciVector& x, double alpha) {
    check_alpha(alpha);
    if (x.size() != ledger.peer_count()) {
        throw DimensionMismatch("phi_step: vector length " + std::to_string(x.size()) +
                                " does not match peer count " +
                                std::to_string(ledger.peer_count()));
    }
    for (const double v : x) {
        if (!(v > 0.0)) {
            throw NonPositiveInput("phi_step: input vector must be strictly positive");
        }
    }
    const std::vector<double> up = ledger.times(x);             // (s.x)_i
    const std::vector<double> down = ledger.transpose_times(x); // (s^T.x)_i
    BciVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double denom = up[i] + down[i];
        // x > 0, so denom == 0 exactly when row i and column i are all zero.
        y[i] = denom == 0.0 ? 1.0 - alpha / 2.0 : alpha * up[i] / denom + (1.0 - alpha);
    }
    return y;
}

SolveResult solve(const ShareMatrix& ledger, const BciParams& params) {
    check_alpha(params.alpha);
    if (params.max_iterations < 1) {
        throw std::invalid_argument("solve: max_iterations must be at least 1");
    }

    SolveResult res;
    res.alpha = params.alpha;
    res.history.push_back(initial_vector(ledger.peer_count(), params.alpha));

    bool converged = false;
    for (int k = 1; k <= params.max_iterations; ++k) {
        const BciVector& prev = res.history.back();
        BciVector next = phi_step(ledger, prev, params.alpha);
        res.residuals.push_back(inf_norm_diff(next, prev));
        const bool fired = stop_fired(params.stopping, next, prev);
        res.history.push_back(std::move(next));
        res.iterations = k;
        if (fired) {
            converged = true;
            break;
        }
    }
    if (!converged) res.warnings.insert(SolveWarning::HitIterationCap);
    if (!ledger.is_irreducible()) res.warnings.insert(SolveWarning::ReducibleMatrix);
    res.x = res.history.back();
    return res;
}

std::vector<SweepEntry> sweep_alpha(const ShareMatrix& ledger, const std::vector<double>& alphas,
                                    const StoppingRule& stopping) {
    std::vector<SweepEntry> out;
    out.reserve(alphas.size());
    for (const double a : alphas) {
        SolveResult r = solve(ledger, BciParams{a, stopping, BciParams{}.max_iterations});
        out.push_back(SweepEntry{a, r.iterations, std::move(r.x)});
    }
    return out;
}

UniformCheck verify_uniform_solution(const ShareMatrix& ledger, double alpha, double tol) {
    check_alpha(alpha);
    if (!(tol > 0.0)) throw std::invalid_argument("verify_uniform_solution: tol must be positive");

    // Solve well below the decision tolerance so the uniformity test is not
    // limited by the stopping rule.
    const double eps = std::max(tol / 10.0, 1e-14);
    const SolveResult r = solve(ledger, BciParams{alpha, StoppingRule::inf_norm(eps), 100000});

    UniformCheck check;
    const double neutral = 1.0 - alpha / 2.0;
    for (const double v : r.x) {
        check.deviation_from_neutral = std::max(check.deviation_from_neutral,
                                                std::abs(v - neutral));
    }
    if (check.deviation_from_neutral > tol) {
        check.status = UniformStatus::NotUniform;
        return check;
    }

    const LedgerSummary s = ledger.summary();
    for (std::size_t i = 0; i < ledger.peer_count(); ++i) {
        check.max_imbalance = std::max(
            check.max_imbalance, std::abs(s.upload_totals[i] - s.download_totals[i]));
    }
    const double allowed = tol * (s.total / static_cast<double>(ledger.peer_count()));
    check.status = check.max_imbalance <= allowed ? UniformStatus::UniformAndBalanced
                                                  : UniformStatus::UniformOnly;
    return check;
}

std::string to_json(const SolveResult& result) {
    std::ostringstream os;
    os << "{\"alpha\":" << fmt17(result.alpha);
    os << ",\"iterations\":" << result.iterations;
    os << ",\"x\":";
    append_array(os, result.x);
    os << ",\"history\":[";
    for (std::size_t t = 0; t < result.history.size(); ++t) {
        if (t) os << ',';
        append_array(os, result.history[t]);
    }
    os << "],\"residuals\":";
    append_array(os, result.residuals);
    os << ",\"warnings\":[";
    bool first = true;
    for (const SolveWarning w : result.warnings) {
        if (!first) os << ',';
        first = false;
        os << '"' << warning_name(w) << '"';
    }
    os << "]}";
    return os.str();
}

}  // namespace bci
