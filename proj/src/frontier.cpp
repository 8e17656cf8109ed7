#include "catmmv/frontier.hpp"

#include <cmath>
#include <string>

#include "catmmv/errors.hpp"
#include "catmmv/quadrature.hpp"

namespace catmmv {

namespace {

double decay_integral(double d, double tau) { return tau * expm1_over_x(-d * tau); }

// int_s^t e^{-eta(u) z} (e^{psi1(u,t) z} - 1) (phi(u) z + 1)^m F2(dz) du expanded in
// tilted moments; the tilt eta(u) - psi1(u,t) >= 0 for u <= t <= T.
double psi_integral(const ModelParams& p, double s, double t, int m) {
    if (p.cat.rho == 0.0 || t == s) return 0.0;
    const auto& f2 = p.claims_catastrophe;
    auto inner = [&](double u) {
        const double e = eta(p, u);
        double shifted = e - psi1(p, u, t);
        if (shifted < 0.0) shifted = 0.0;  // guard roundoff at u -> t
        const double ph = phi(p, u);
        const double d0 = f2.tilted_moment(0, shifted) - f2.tilted_moment(0, e);
        const double d1 = f2.tilted_moment(1, shifted) - f2.tilted_moment(1, e);
        if (m == 1) return ph * d1 + d0;
        const double d2 = f2.tilted_moment(2, shifted) - f2.tilted_moment(2, e);
        return ph * ph * d2 + 2.0 * ph * d1 + d0;
    };
    return integrate(inner, s, t);
}

struct Exponentials {
    double e0, e2, e3;
};

Exponentials frontier_exponentials(const ModelParams& p, double s, double t, double lambda) {
    const double p1 = psi1(p, s, t);
    return {std::exp(eta(p, s) * lambda + zeta(p, s)), std::exp(p1 * lambda + psi2(p, s, t)),
            std::exp(p1 * lambda + psi3(p, s, t))};
}

// (rho iota_r mu2 / delta)(1 - e^{-delta (t-s)}) and the sigma2 analogue.
double lambda_gap_iota(const ModelParams& p, double s, double t) {
    return p.cat.rho * p.loadings.iota_r * p.mu2() * decay_integral(p.cat.delta, t - s);
}

// Affine term of E^P[lambda Y H] over the window: the weighted-path intensity
// jumps arrive with kernel e^{(psi1 - eta) z} (phi z + 1) F2, so the mean mark is
// M1 + phi M2 at the tilt eta(u) - psi1(u, t); at t = T this collapses to
// (1 + iota_r) mu2.
double lambda_affine_weighted(const ModelParams& p, double s, double t) {
    if (p.cat.rho == 0.0 || t == s) return 0.0;
    const auto& f2 = p.claims_catastrophe;
    return p.cat.rho * integrate(
                           [&](double u) {
                               double tilt = eta(p, u) - psi1(p, u, t);
                               if (tilt < 0.0) tilt = 0.0;
                               return std::exp(-p.cat.delta * (t - u)) *
                                      (f2.tilted_moment(1, tilt) +
                                       phi(p, u) * f2.tilted_moment(2, tilt));
                           },
                           s, t);
}

// Cov(Y H, lambda) / E[Y H]: the affine term above less the plain intensity mean.
double lambda_cov_term(const ModelParams& p, double s, double t) {
    return lambda_affine_weighted(p, s, t) -
           p.cat.rho * p.mu2() * decay_integral(p.cat.delta, t - s);
}

double lambda_var_term(const ModelParams& p, double s, double t) {
    // (rho sigma2^2 / 2 delta)(1 - e^{-2 delta (t-s)}), with the delta -> 0 limit.
    return p.cat.rho * p.sigma2_sq() * decay_integral(2.0 * p.cat.delta, t - s);
}

}  // namespace

double psi1(const ModelParams& p, double s, double t) {
    const double c = p.loadings.kappa_r * p.loadings.kappa_r * p.mu1() * p.mu1() / p.sigma1_sq();
    // (e^{-delta (t-s)} - e^{-delta (T-s)})/delta = e^{-delta (t-s)} (1-e^{-delta (T-t)})/delta
    return c * std::exp(-p.cat.delta * (t - s)) * decay_integral(p.cat.delta, p.T - t);
}

double psi2(const ModelParams& p, double s, double t) {
    return zeta(p, t) + p.cat.rho * psi_integral(p, s, t, 1);
}

double psi3(const ModelParams& p, double s, double t) {
    return zeta(p, t) + p.cat.rho * psi_integral(p, s, t, 2);
}

double psi(const ModelParams& /*params*/, const CoefficientCurves& curves, double s, double t,
           int which) {
    switch (which) {
        case 1: return psi1(curves.params(), s, t);
        case 2: return psi2(curves.params(), s, t);
        case 3: return psi3(curves.params(), s, t);
        default: throw Error("psi index must be 1, 2 or 3");
    }
}

FrontierConstants frontier_constants(const ModelParams& p, const CoefficientCurves& curves,
                                     double s, double t, double lambda) {
    if (!(t > s)) throw DegenerateWindow("frontier constants need t > s");
    const auto e = frontier_exponentials(curves.params(), s, t, lambda);
    const double num = e.e0 * e.e3 - e.e2 * e.e2;
    const double den = (e.e0 - e.e2) * (e.e0 - e.e2);
    if (num < 0.0) {
        throw ConditionViolated("C1 numerator e0*e3 - e2^2 is negative: " + std::to_string(num));
    }
    const double disc = std::exp(-p.market.r * (p.T - t));
    const double a_t = alpha(p, t);
    const double gap = lambda_gap_iota(p, s, t);
    const double cov = lambda_cov_term(p, s, t);
    FrontierConstants c;
    c.C1 = num / den;
    // Completing the square with distinct gap and covariance terms; the two
    // coincide at t = T, where this reduces to e0 (e3 - e2)/num * alpha * gap.
    c.C2 = a_t * (gap - e.e2 * (e.e0 - e.e2) * cov / num) * disc;
    c.C3 = a_t * a_t * (lambda_var_term(p, s, t) - e.e2 * e.e2 * cov * cov / num) * disc * disc;
    return c;
}

double mean_lambda(const ModelParams& p, double s, double t, double lambda) {
    return std::exp(-p.cat.delta * (t - s)) * lambda +
           p.cat.rho * p.mu2() * decay_integral(p.cat.delta, t - s);
}

double second_moment_lambda(const ModelParams& p, double s, double t, double lambda) {
    const double m = mean_lambda(p, s, t, lambda);
    return m * m + lambda_var_term(p, s, t);
}

double mean_lambda_qstar(const ModelParams& p, double s, double t, double lambda) {
    return std::exp(-p.cat.delta * (t - s)) * lambda +
           p.cat.rho * (p.loadings.iota_r + 1.0) * p.mu2() * decay_integral(p.cat.delta, t - s);
}

double mean_wealth_Q(const ModelParams& p, const CoefficientCurves& /*curves*/, const Anchor& a,
                     double t) {
    // From the conserved combination G X + 2 Y H + I and the Q*-martingale
    // property of Y H:  E^Q[G X] = G(s) x + I(s, lambda_s) - alpha(t) E^Q lambda(t) - beta(t).
    const double disc = std::exp(-p.market.r * (p.T - t));
    const double i_s = alpha(p, a.s) * a.lambda_s + beta_fn(p, a.s);
    const double m_q = mean_lambda_qstar(p, a.s, t, a.lambda_s);
    return a.x_s * std::exp(p.market.r * (t - a.s)) +
           (i_s - alpha(p, t) * m_q - beta_fn(p, t)) * disc;
}

double mean_wealth_P(const ModelParams& p, const CoefficientCurves& curves, const Anchor& a,
                     double t) {
    const auto e = frontier_exponentials(p, a.s, t, a.lambda_s);
    const double disc = std::exp(-p.market.r * (p.T - t));
    const double gap =
        (a.y_s / p.theta) * (e.e0 - e.e2) + alpha(p, t) * lambda_gap_iota(p, a.s, t);
    return mean_wealth_Q(p, curves, a, t) + gap * disc;
}

double variance_relation(const ModelParams& p, const CoefficientCurves& curves, const Anchor& a,
                         double t, double mean_P_observed) {
    const auto c = frontier_constants(p, curves, a.s, t, a.lambda_s);
    const double dev = mean_P_observed - mean_wealth_Q(p, curves, a, t) - c.C2;
    return c.C1 * dev * dev + c.C3;
}

double var_wealth_P_direct(const ModelParams& p, const CoefficientCurves& /*curves*/,
                           const Anchor& a, double t) {
    // Var[G X] = 4 Var[Y H] + Var[I] + 4 Cov(Y H, I)
    //          = (y/theta)^2 (e0 e3 - e2^2) + alpha^2 Var lambda
    //            + 2 alpha (y/theta) e2 * lambda_cov_term.
    const auto e = frontier_exponentials(p, a.s, t, a.lambda_s);
    const double yt = a.y_s / p.theta;
    const double a_t = alpha(p, t);
    const double var_gx = yt * yt * (e.e0 * e.e3 - e.e2 * e.e2) +
                          a_t * a_t * lambda_var_term(p, a.s, t) +
                          2.0 * a_t * yt * e.e2 * lambda_cov_term(p, a.s, t);
    const double disc = std::exp(-p.market.r * (p.T - t));
    return var_gx * disc * disc;
}

YhMoments yh_moments(const ModelParams& p, const CoefficientCurves& curves, double s, double t,
                     double lambda, double y) {
    const double p1 = psi1(p, s, t);
    const double e2 = std::exp(p1 * lambda + psi2(p, s, t));
    const double e3 = std::exp(p1 * lambda + psi3(p, s, t));
    const Ghik w(curves.params());
    YhMoments m;
    m.yh = y / (2.0 * p.theta) * e2;
    m.yh_sq = y * y / (2.0 * p.theta) * e3 * w.H(s, lambda);
    m.lam_yh =
        m.yh * (std::exp(-p.cat.delta * (t - s)) * lambda + lambda_affine_weighted(p, s, t));
    return m;
}

FrontierPoint frontier_point(const ModelParams& p, const CoefficientCurves& curves,
                             const Anchor& a, double t) {
    FrontierPoint pt;
    pt.t = t;
    pt.mean_Q = mean_wealth_Q(p, curves, a, t);
    pt.mean_P = mean_wealth_P(p, curves, a, t);
    pt.var_P = variance_relation(p, curves, a, t, pt.mean_P);
    return pt;
}

}  // namespace catmmv
