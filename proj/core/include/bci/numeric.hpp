#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace bci {

// Compensated (Kahan) accumulator. Callers fix the summation order, which
// keeps dot products bitwise reproducible across runs.
class KahanSum {
public:
    void add(double v) {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// Exact powers of ten up to 10^22 are representable as doubles.
inline double pow10i(int k) {
    double p = 1.0;
    while (k-- > 0) p *= 10.0;
    return p;
}

// Half-away-from-zero rounding at `decimals` places, as a scaled integer.
// Two doubles agree at `decimals` places iff their scaled keys are equal.
inline long long round_scaled(double v, int decimals) {
    return std::llround(v * pow10i(decimals));
}

inline double round_half_away(double v, int decimals) {
    const double scale = pow10i(decimals);
    return std::llround(v * scale) / scale;
}

inline double inf_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

}  // namespace bci
