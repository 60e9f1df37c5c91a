#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace bci {

// mt19937_64 output is fully specified by the standard. The helpers below
// avoid std::uniform_*_distribution, whose value streams differ between
// standard libraries; seeded runs stay reproducible everywhere.

inline double uniform_double(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + uniform_double(rng) * (hi - lo);
}

// Modulo bias is negligible for n far below 2^64.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}

// k distinct draws from `pool`, order randomized. Consumes pool.
template <typename T>
std::vector<T> sample_distinct(std::vector<T> pool, std::size_t k, std::mt19937_64& rng) {
    std::vector<T> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace bci
