#include "catmmv/strategies.hpp"

#include <cmath>
#include <string>

#include "catmmv/errors.hpp"
#include "catmmv/quadrature.hpp"

namespace catmmv {

namespace {

double discount_to_T(const ModelParams& p, double t) {
    return std::exp(-p.market.r * (p.T - t));
}

}  // namespace

InsurerControls feedback_controls_y(const ModelParams& p, const CoefficientCurves& curves,
                                    double t, double y, double lambda,
                                    bool verify_by_quadrature) {
    const Ghik w(curves.params());
    const double G = w.G(t);
    const double H = w.H(t, lambda);
    const double mu1 = p.mu1();
    const double a = alpha(p, t);
    const double ph = phi(p, t);

    InsurerControls c;
    c.pi = 2.0 * H * (p.market.mu0 - p.market.r) * y / (G * p.market.sigma0 * p.market.sigma0);
    c.u = 2.0 * H * p.loadings.kappa_r * mu1 * y / (G * p.sigma1_sq());
    c.v = (2.0 * H * ph * y + a) / (p.cat.k * G);

    if (verify_by_quadrature) {
        // Ratio-of-integrals route: v = { iota_r mu2 y + 2 y Ht(H_z) + Ht(I_z) } / (k G Ht(z))
        // with Ht(f) = int f(z) z / (2 H(t, lambda + z)) F2(dz).
        const auto& f2 = p.claims_catastrophe;
        const double z_cut = f2.effective_support_bound();
        QuadratureOptions opts;
        opts.abs_tol = 0.0;
        opts.rel_tol = 1e-12;
        auto tilde = [&](const std::function<double(double)>& f) {
            return integrate(
                [&](double z) { return f(z) * z / (2.0 * w.H(t, lambda + z)) * f2.density(z); },
                0.0, z_cut, opts);
        };
        const double ht_z = tilde([](double z) { return z; });
        const double ht_hz = tilde([&](double z) { return w.H(t, lambda + z) - H; });
        const double ht_iz = tilde([&](double z) { return a * z; });
        const double v_quad =
            (p.loadings.iota_r * p.mu2() * y + 2.0 * y * ht_hz + ht_iz) / (p.cat.k * G * ht_z);
        const double scale = std::max(std::abs(c.v), std::abs(v_quad));
        if (scale > 0.0 && std::abs(c.v - v_quad) > 1e-9 * scale) {
            throw Error("catastrophe retention routes disagree: closed " + std::to_string(c.v) +
                        " vs quadrature " + std::to_string(v_quad));
        }
    }
    return c;
}

AdversaryControls adversary_controls(const ModelParams& p, const CoefficientCurves& curves,
                                     double t) {
    AdversaryControls b;
    b.o = -(p.market.mu0 - p.market.r) / p.market.sigma0;
    const double slope = p.loadings.kappa_r * p.mu1() / p.sigma1_sq();
    b.p = [slope](double z) { return slope * z; };
    const double e = eta(curves.params(), t);
    const double ph = phi(curves.params(), t);
    b.q = [e, ph](double z) { return std::exp(-e * z) * (1.0 + ph * z) - 1.0; };
    return b;
}

double precommitted_bracket(const ModelParams& p, const Anchor& a, double t, double x,
                            double lambda_t) {
    const double disc = discount_to_T(p, t);
    const double anchor_exponent = eta(p, a.s) * a.lambda_s + zeta(p, a.s);
    return -x + a.x_s * std::exp(p.market.r * (t - a.s)) +
           (a.y_s / p.theta) * std::exp(anchor_exponent) * disc -
           (alpha(p, t) * lambda_t + beta_fn(p, t)) * disc +
           (alpha(p, a.s) * a.lambda_s + beta_fn(p, a.s)) * disc;
}

InsurerControls precommitted_controls(const ModelParams& p, const CoefficientCurves& curves,
                                      const Anchor& a, double t, double x, double lambda_t) {
    const double d = precommitted_bracket(curves.params(), a, t, x, lambda_t);
    const double disc = discount_to_T(p, t);
    InsurerControls c;
    c.pi = (p.market.mu0 - p.market.r) / (p.market.sigma0 * p.market.sigma0) * d;
    c.u = p.loadings.kappa_r * p.mu1() / p.sigma1_sq() * d;
    c.v = phi(p, t) * d / p.cat.k + alpha(p, t) * disc / p.cat.k;
    return c;
}

double value_function(const ModelParams& /*params*/, const CoefficientCurves& curves,
                      const Anchor& a, double t, double x, double lambda_t) {
    // W = [c^2 - (G x + I)^2] / (4 H) with c = G(s) x_s + 2 H(s) y_s + I(s), written
    // in factored form with like-sized terms grouped so the small-H regime does
    // not cancel catastrophically.
    const Ghik w(curves.params());
    const double h_s = w.H(a.s, a.lambda_s);
    const double h_t = w.H(t, lambda_t);
    const double anchor_gx = w.G(a.s) * a.x_s;
    const double anchor_i = w.I(a.s, a.lambda_s);
    const double gx = w.G(t) * x;
    const double i_t = w.I(t, lambda_t);
    const double d_linear = (anchor_gx - gx) + (anchor_i - i_t);  // c - A without the H term
    const double sum = anchor_gx + anchor_i + 2.0 * h_s * a.y_s + gx + i_t;  // c + A
    return d_linear * sum / (4.0 * h_t) + a.y_s * (h_s / h_t) * sum / 2.0;
}

double mmv_value(const ModelParams& p, const CoefficientCurves& curves) {
    const Anchor a = anchor_of(p);
    return value_function(p, curves, a, a.s, a.x_s, a.lambda_s);
}

}  // namespace catmmv
