// Shared fixtures: the 4-peer example ledger, random matrix generators and
// dense brute-force oracles kept independent of the library's sparse paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bci/rng.hpp"
#include "bci/share_matrix.hpp"

namespace testsupport {

using Dense = std::vector<std::vector<double>>;

inline Dense golden_dense() {
    return {
        {0, 100, 50, 20},
        {20, 0, 30, 40},
        {10, 40, 0, 50},
        {50, 10, 60, 0},
    };
}

inline bci::ShareMatrix from_dense(const Dense& d) {
    bci::ShareMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (d[i][j] != 0.0) {
                m.record(static_cast<bci::PeerId>(i), static_cast<bci::PeerId>(j), d[i][j]);
            }
        }
    }
    return m;
}

inline bci::ShareMatrix golden_matrix() { return from_dense(golden_dense()); }

inline Dense to_dense(const bci::ShareMatrix& m) {
    Dense d(m.peer_count(), std::vector<double>(m.peer_count(), 0.0));
    for (bci::PeerId i = 0; i < m.peer_count(); ++i) {
        for (const auto& [j, v] : m.row(i)) d[i][j] = v;
    }
    return d;
}

inline Dense random_sparse_dense(std::mt19937_64& rng, std::size_t n, double density) {
    Dense d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && bci::uniform_double(rng) < density) {
                d[i][j] = bci::uniform_range(rng, 0.5, 100.0);
            }
        }
    }
    return d;
}

// Random sparse matrix plus a directed ring, so the digraph is strongly
// connected by construction.
inline Dense random_irreducible_dense(std::mt19937_64& rng, std::size_t n, double density) {
    Dense d = random_sparse_dense(rng, n, density);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (d[i][j] == 0.0) d[i][j] = bci::uniform_range(rng, 0.5, 100.0);
    }
    return d;
}

// Weighted sum of random permutation matrices (plus the rotation, for strong
// connectivity), diagonal dropped. Row and column sums stay equal, so the
// ledger is balanced.
inline Dense random_balanced_dense(std::mt19937_64& rng, std::size_t n, std::size_t permutations) {
    Dense d(n, std::vector<double>(n, 0.0));
    std::vector<std::size_t> perm(n);
    const double ring_w = bci::uniform_range(rng, 0.5, 2.0) + 1.0;  // one weight, rotation first
    for (std::size_t i = 0; i < n; ++i) {
        d[i][(i + 1) % n] += ring_w;
    }
    for (std::size_t k = 0; k < permutations; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        bci::shuffle_in_place(perm, rng);
        const double w = bci::uniform_range(rng, 0.5, 2.0);
        for (std::size_t i = 0; i < n; ++i) d[i][perm[i]] += w;
    }
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;  // keeps balance
    return d;
}

// --- dense oracles ---

inline std::vector<double> dense_phi(const Dense& s, const std::vector<double>& x, double alpha) {
    const std::size_t n = s.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double up = 0.0, down = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            up += s[i][j] * x[j];
            down += s[j][i] * x[j];
        }
        const double denom = up + down;
        y[i] = denom == 0.0 ? 1.0 - alpha / 2.0 : alpha * up / denom + (1.0 - alpha);
    }
    return y;
}

inline bool dense_strongly_connected(const Dense& s) {
    const std::size_t n = s.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        reach[i][i] = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (s[i][j] > 0.0) reach[i][j] = true;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!reach[i][j]) return false;
        }
    }
    return true;
}

inline std::vector<std::size_t> dense_free_riders(const Dense& s) {
    const std::size_t n = s.size();
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        bool row_zero = true, col_zero = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (s[i][j] != 0.0) row_zero = false;
            if (s[j][i] != 0.0) col_zero = false;
        }
        if (row_zero && !col_zero) out.push_back(i);
    }
    return out;
}

}  // namespace testsupport
