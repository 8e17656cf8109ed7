#include "catmmv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "catmmv/errors.hpp"

namespace catmmv {
namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double integral;
    double error;
};

PanelResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double result_gauss = fc * kWg[3];
    double result_kronrod = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        result_kronrod += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) result_gauss += kWg[j / 2] * (f1 + f2);
    }
    result_kronrod *= half;
    result_gauss *= half;
    return {result_kronrod, std::abs(result_kronrod - result_gauss)};
}

struct Panel {
    double a, b, integral, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
    if (a == b) return 0.0;
    std::priority_queue<Panel> panels;
    PanelResult r0 = gauss_kronrod_15(f, a, b);
    panels.push({a, b, r0.integral, r0.error});
    double total = r0.integral;
    double total_err = r0.error;
    int n_split = 0;
    auto tol = [&](double t) { return std::max(opts.abs_tol, opts.rel_tol * std::abs(t)); };
    while (total_err > tol(total)) {
        if (n_split++ >= opts.max_subdivisions) {
            throw QuadratureFailure("tolerance " + std::to_string(opts.abs_tol) +
                                    " not reached after " + std::to_string(n_split) +
                                    " subdivisions on [" + std::to_string(a) + "," +
                                    std::to_string(b) + "]");
        }
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            throw QuadratureFailure("interval collapsed below floating-point resolution");
        }
        PanelResult left = gauss_kronrod_15(f, worst.a, mid);
        PanelResult right = gauss_kronrod_15(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        panels.push({worst.a, mid, left.integral, left.error});
        panels.push({mid, worst.b, right.integral, right.error});
    }
    if (!std::isfinite(total)) throw QuadratureFailure("non-finite integral value");
    return total;
}

double integrate_upper_infinite(const std::function<double(double)>& f, double a,
                                const QuadratureOptions& opts) {
    // Rational tail map z = a + u/(1-u), u in [0,1); dz = du/(1-u)^2.  Unlike a
    // plain log transform this stays bounded for any exponential decay rate.
    auto g = [&](double u) {
        const double one_minus = 1.0 - u;
        const double z = a + u / one_minus;
        const double fz = f(z);
        if (fz == 0.0) return 0.0;
        return fz / (one_minus * one_minus);
    };
    const double u_max = 1.0 - 1e-12;
    return integrate(g, 0.0, u_max, opts);
}

}  // namespace catmmv
