#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "bci/share_matrix.hpp"

namespace bci {

// Per-peer contribution scores; entry i lies in [1-alpha, 1] after any step.
using BciVector = std::vector<double>;

struct StoppingRule {
    enum class Kind {
        FourDecimalEquality,  // stop when x^k equals x^{k-1} rounded to 4 decimals
        InfNormTol,           // stop when |x^k - x^{k-1}|_inf < eps
    };

    Kind kind = Kind::FourDecimalEquality;
    double eps = 0.0;

    static StoppingRule four_decimals() { return {Kind::FourDecimalEquality, 0.0}; }
    static StoppingRule inf_norm(double eps);

    // Magnitude below which a change is negligible under this rule. Used by
    // the distributed runner's quiescence detection.
    double change_eps() const;
};

struct BciParams {
    double alpha = 0.8;
    StoppingRule stopping = StoppingRule::four_decimals();
    int max_iterations = 10000;
};

enum class SolveWarning { ReducibleMatrix, HitIterationCap };

const char* warning_name(SolveWarning w);

struct SolveResult {
    double alpha = 0.0;
    BciVector x;                      // converged scores
    int iterations = 0;               // k at which the stopping rule fired
    std::vector<BciVector> history;   // x^0 .. x^k, iterations + 1 entries
    std::vector<double> residuals;    // |x^t - x^{t-1}|_inf, iterations entries
    std::set<SolveWarning> warnings;
};

// Score floor, ceiling and the neutral value taken by isolated peers.
double min_bci(double alpha);
double max_bci();
double neutral_bci(double alpha);

// x^0: every peer starts at the neutral value 1 - alpha/2.
BciVector initial_vector(std::size_t n, double alpha);

// One synchronous update: y_i = alpha * (s.x)_i / ((s.x)_i + (s^T.x)_i) + (1 - alpha)
// when the denominator is nonzero, else the neutral value. x must be
// strictly positive, so the denominator vanishes only for peers with an
// all-zero row and column.
BciVector phi_step(const ShareMatrix& ledger, const BciVector& x, double alpha);

// Iterates phi_step from the initial vector until the stopping rule fires or
// the iteration cap is hit. Reducible ledgers are solved anyway, with a
// warning (free riders make the matrix reducible by construction).
SolveResult solve(const ShareMatrix& ledger, const BciParams& params);

struct SweepEntry {
    double alpha = 0.0;
    int iterations = 0;
    BciVector x;
};

// One solve per alpha on a shared ledger, in input order.
std::vector<SweepEntry> sweep_alpha(const ShareMatrix& ledger, const std::vector<double>& alphas,
                                    const StoppingRule& stopping);

enum class UniformStatus {
    UniformAndBalanced,  // scores uniform and per-peer upload == download
    UniformOnly,         // scores uniform but some peer's totals differ
    NotUniform,
};

struct UniformCheck {
    UniformStatus status = UniformStatus::NotUniform;
    double deviation_from_neutral = 0.0;  // max |x_i - (1 - alpha/2)|
    double max_imbalance = 0.0;           // max |upload_i - download_i|, uniform cases only
};

// Checks the uniform-solution/balance pair: a solve landing within tol of
// the neutral vector must come from a ledger whose per-peer totals balance
// within tol * (total / n).
UniformCheck verify_uniform_solution(const ShareMatrix& ledger, double alpha, double tol);

// Full-precision JSON: { alpha, iterations, x, history, residuals, warnings },
// reals at 17 significant digits.
std::string to_json(const SolveResult& result);

}  // namespace bci
