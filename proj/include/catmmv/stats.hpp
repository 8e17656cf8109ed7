#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace catmmv {

// Pairwise (cascade) summation: deterministic for a fixed element order and
// independent of how the work that produced the elements was partitioned.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

struct MeanVarSe {
    double mean = 0.0;
    double var = 0.0;
    double se = 0.0;
};

// Two-pass mean/variance with pairwise sums; SE = sqrt(var / n).
inline MeanVarSe mean_var_se(const std::vector<double>& v) {
    MeanVarSe out;
    const std::size_t n = v.size();
    if (n == 0) return out;
    out.mean = pairwise_sum(v) / static_cast<double>(n);
    if (n == 1) return out;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = v[i] - out.mean;
        sq[i] = d * d;
    }
    out.var = pairwise_sum(sq) / static_cast<double>(n - 1);
    out.se = std::sqrt(out.var / static_cast<double>(n));
    return out;
}

// Standard error of the sample variance, sqrt((m4 - var^2)/n) with the fourth
// central moment m4.
inline double variance_se(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const MeanVarSe basic = mean_var_se(v);
    std::vector<double> p4(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = v[i] - basic.mean;
        p4[i] = d * d * d * d;
    }
    const double m4 = pairwise_sum(p4) / static_cast<double>(n);
    const double inner = m4 - basic.var * basic.var;
    return inner > 0.0 ? std::sqrt(inner / static_cast<double>(n)) : 0.0;
}

}  // namespace catmmv
