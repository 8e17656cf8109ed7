#pragma once

// Test-only oracles, independent of the library's evaluation paths: classical
// RK4 for backward ODE systems, composite Simpson quadrature, and the
// Kolmogorov-Smirnov / chi-square machinery for the samplers.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "catmmv/model.hpp"

namespace oracles {

// Classical fixed-step RK4 for y' = f(t, y), integrating from t0 to t1 (either
// direction) in n steps.
inline std::vector<double> rk4(const std::function<std::vector<double>(double,
                                                                       const std::vector<double>&)>& f,
                               std::vector<double> y, double t0, double t1, int n) {
    const double h = (t1 - t0) / n;
    double t = t0;
    const std::size_t dim = y.size();
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (int step = 0; step < n; ++step) {
        k1 = f(t, y);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        k2 = f(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        k3 = f(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
        k4 = f(t + h, tmp);
        for (std::size_t i = 0; i < dim; ++i) {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
    }
    return y;
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 == 1) n += 1;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Richardson-refined Simpson: doubles panels until two refinements agree.
inline double simpson_auto(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-11) {
    int n = 64;
    double prev = simpson(f, a, b, n);
    for (int iter = 0; iter < 14; ++iter) {
        n *= 2;
        const double cur = simpson(f, a, b, n);
        if (std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    return prev;
}

// One-sample Kolmogorov-Smirnov test against a cdf; returns the asymptotic
// p-value  Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double ks_p_value(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
    }
    const double sq = std::sqrt(n);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        p += term;
        sign = -sign;
        if (std::abs(term) < 1e-12) break;
    }
    return std::max(0.0, std::min(1.0, 2.0 * p));
}

// Regularized upper incomplete gamma Q(a, x) by series / continued fraction.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - gln);
        return 1.0 - p;
    }
    // continued fraction for Q(a,x)
    double b = x + 1.0 - a;
    double c = 1e308;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

// Chi-square goodness-of-fit p-value for observed counts vs expected.
inline double chi_square_p(const std::vector<double>& observed,
                           const std::vector<double>& expected) {
    double stat = 0.0;
    int dof = -1;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) continue;
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
        dof += 1;
    }
    if (dof <= 0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * stat);
}

// The numerical-example parameter set used throughout the experiments.
inline catmmv::ModelParams section5_params() {
    catmmv::ModelParams p;
    p.market = {0.03, 0.4, 0.01};
    p.loadings = {0.1, 0.105, 0.1, 0.12};
    p.cat = {0.01, 0.01, 10000.0};
    p.claims_ordinary = catmmv::ClaimDistribution::exponential(0.2);
    p.claims_catastrophe = catmmv::ClaimDistribution::exponential(0.3);
    p.theta = 1.0;
    p.T = 100.0;
    p.s = 0.0;
    p.x0 = 100.0;
    p.lambda0 = 1.0;
    p.y0 = 1.0;
    return p;
}

// Same set on a reduced horizon (Monte Carlo scale).
inline catmmv::ModelParams section5_params_T(double T) {
    catmmv::ModelParams p = section5_params();
    p.T = T;
    return p;
}

// The catastrophe-claim variant that satisfies the diffusion-model hypothesis.
inline catmmv::ModelParams diffusion_variant_params() {
    catmmv::ModelParams p = section5_params();
    p.claims_catastrophe = catmmv::ClaimDistribution::exponential(3.0);
    return p;
}

}  // namespace oracles
