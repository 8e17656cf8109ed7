#include "catmmv/diffusion.hpp"

#include <cmath>
#include <string>

#include "catmmv/coefficients.hpp"
#include "catmmv/errors.hpp"
#include "catmmv/quadrature.hpp"

namespace catmmv {

namespace {

void require_diffusion_params(const ModelParams& p) {
    if (!(p.cat.rho > 0.0) || !(p.cat.delta > 0.0)) {
        throw ConditionViolated("diffusion approximation needs rho > 0 and delta > 0");
    }
    if (!(p.sigma2_sq() > 0.0)) {
        throw ConditionViolated("diffusion approximation needs sigma2 > 0");
    }
}

}  // namespace

Discriminant discriminant(const ModelParams& p) {
    require_diffusion_params(p);
    const double kr2m2 = p.loadings.kappa_r * p.loadings.kappa_r * p.mu1() * p.mu1();
    const double delta = p.cat.delta;
    Discriminant d;
    d.Delta = 4.0 * delta * delta -
              8.0 * kr2m2 * p.sigma2_sq() * delta / (p.mu2() * p.sigma1_sq());
    if (d.Delta < 0.0) {
        throw ConditionViolated(
            "Delta = " + std::to_string(d.Delta) +
            " < 0; requires delta*mu2/sigma2^2 >= 2*kappa_r^2*mu1^2/sigma1^2");
    }
    const double denom = 4.0 * p.cat.rho * p.sigma2_sq();
    const double sq = std::sqrt(d.Delta);
    d.d1 = (2.0 * delta + sq) / denom;
    d.d2 = (2.0 * delta - sq) / denom;
    return d;
}

DiffusionCoefficients::DiffusionCoefficients(ModelParams params, std::size_t n_grid)
    : params_(std::move(params)) {
    disc_ = discriminant(params_);
    branch_ = disc_.Delta == 0.0 ? DeltaBranch::DeltaZero : DeltaBranch::DeltaPositive;
    if (n_grid < 2) throw Error("coefficient grid needs at least 2 points");
    grid_.resize(n_grid);
    zeta_.resize(n_grid);
    dt_ = params_.T / static_cast<double>(n_grid - 1);
    for (std::size_t i = 0; i < n_grid; ++i) {
        const double t = (i + 1 == n_grid) ? params_.T
                                           : params_.T * static_cast<double>(i) /
                                                 static_cast<double>(n_grid - 1);
        grid_[i] = t;
        zeta_[i] = zeta_exact(t);
    }
}

double DiffusionCoefficients::xi(double t) const {
    const double tau = params_.T - t;
    if (branch_ == DeltaBranch::DeltaZero) {
        const double kr2m2 = params_.loadings.kappa_r * params_.loadings.kappa_r *
                             params_.mu1() * params_.mu1();
        const double rm = params_.cat.rho * params_.mu2();
        return kr2m2 / params_.sigma1_sq() * tau / (rm * tau + rm / params_.cat.delta);
    }
    const double sq = std::sqrt(disc_.Delta);
    const double em = std::expm1(sq * tau);
    // d1 e^{sq tau} - d2 = d1 expm1(sq tau) + (d1 - d2); the root gap is computed
    // directly from sqrt(Delta) so tiny discriminants do not cancel.
    const double gap = sq / (2.0 * params_.cat.rho * params_.sigma2_sq());
    return disc_.d1 * disc_.d2 * em / (disc_.d1 * em + gap);
}

double DiffusionCoefficients::eta(double t) const {
    const double tau = params_.T - t;
    const double b = 2.0 * params_.loadings.iota_r + 1.0;
    if (branch_ == DeltaBranch::DeltaZero) {
        const double kr2m2 = params_.loadings.kappa_r * params_.loadings.kappa_r *
                             params_.mu1() * params_.mu1();
        const double delta = params_.cat.delta;
        return b * delta * kr2m2 / params_.sigma1_sq() * tau * tau / (delta * tau + 1.0);
    }
    // Solution of eta' = (delta - 2 rho sigma2^2 xi) eta - 2 rho mu2 (2 iota_r + 1) xi,
    // eta(T) = 0, with integrating factor e^{sq tau / 2} (d1 - d2 e^{-sq tau})/(d1 - d2):
    //   eta = 4 rho mu2 (2 iota_r + 1) d1 d2 (e^{sq tau / 2} - 1)^2 / (sq (d1 e^{sq tau} - d2)).
    const double sq = std::sqrt(disc_.Delta);
    const double half = std::expm1(0.5 * sq * tau);
    const double gap = sq / (2.0 * params_.cat.rho * params_.sigma2_sq());
    const double denom = disc_.d1 * std::expm1(sq * tau) + gap;
    return 4.0 * params_.cat.rho * params_.mu2() * b * disc_.d1 * disc_.d2 * half * half /
           (sq * denom);
}

double DiffusionCoefficients::zeta_exact(double t) const {
    const ModelParams& p = params_;
    const double tau = p.T - t;
    const double rho = p.cat.rho;
    const double s2 = p.sigma2_sq();
    const double mkt = (p.market.mu0 - p.market.r) * (p.market.mu0 - p.market.r) /
                       (p.market.sigma0 * p.market.sigma0);
    const double cat_term = rho * p.loadings.iota_r * p.loadings.iota_r * p.mu2() * p.mu2() / s2;
    const double integral = integrate(
        [&](double s) {
            const double e = eta(s);
            return rho * p.mu2() * (2.0 * p.loadings.iota_r + 1.0) * e +
                   0.5 * rho * s2 * e * e + rho * s2 * xi(s);
        },
        t, p.T);
    return integral + (mkt + cat_term) * tau;
}

double DiffusionCoefficients::zeta(double t) const {
    if (t <= 0.0) return zeta_.front();
    if (t >= params_.T) return zeta_.back();
    const double pos = t / dt_;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= zeta_.size()) i = zeta_.size() - 2;
    const double w = (t - grid_[i]) / dt_;
    return zeta_[i] + w * (zeta_[i + 1] - zeta_[i]);
}

double DiffusionCoefficients::alpha(double t) const { return catmmv::alpha(params_, t); }

double DiffusionCoefficients::beta(double t) const { return catmmv::beta_fn(params_, t); }

double DiffusionCoefficients::G(double t) const {
    return std::exp(params_.market.r * (params_.T - t));
}

double DiffusionCoefficients::H(double t, double lambda) const {
    // Interpolated zeta keeps this cheap enough for simulation inner loops; the
    // residual checks recompute zeta_exact themselves.
    return std::exp(xi(t) * lambda * lambda + eta(t) * lambda + zeta(t)) /
           (2.0 * params_.theta);
}

double DiffusionCoefficients::H_lambda(double t, double lambda) const {
    return (2.0 * xi(t) * lambda + eta(t)) * H(t, lambda);
}

double DiffusionCoefficients::I(double t, double lambda) const {
    return alpha(t) * lambda + beta(t);
}

DiffusionCoefficients diffusion_coefficients(const ModelParams& params, std::size_t n_grid) {
    return DiffusionCoefficients(params, n_grid);
}

InsurerControls diffusion_feedback_controls(const ModelParams& p,
                                            const DiffusionCoefficients& dc, double t, double y,
                                            double lambda) {
    const double G = dc.G(t);
    const double H = dc.H(t, lambda);
    InsurerControls c;
    c.pi = 2.0 * H * (p.market.mu0 - p.market.r) * y / (G * p.market.sigma0 * p.market.sigma0);
    // The approximated ordinary-claim noise has variance sigma1^2 rho mu2 / delta.
    c.u = 2.0 * H * p.loadings.kappa_r * p.mu1() * lambda * y /
          (G * p.sigma1_sq() * p.cat.rho * p.mu2() / p.cat.delta);
    c.v = (2.0 * H * p.loadings.iota_r * p.mu2() * y / (G * p.sigma2_sq()) +
           2.0 * dc.H_lambda(t, lambda) * y / G + dc.alpha(t) / G) /
          p.cat.k;
    return c;
}

namespace {

double conserved_anchor(const DiffusionCoefficients& dc, const Anchor& a) {
    return dc.G(a.s) * a.x_s + 2.0 * dc.H(a.s, a.lambda_s) * a.y_s + dc.I(a.s, a.lambda_s);
}

}  // namespace

InsurerControls diffusion_controls(const ModelParams& p, const DiffusionCoefficients& dc,
                                   const Anchor& a, double t, double x, double lambda_t) {
    const double G = dc.G(t);
    const double d = (conserved_anchor(dc, a) - G * x - dc.I(t, lambda_t)) / G;
    const double disc = std::exp(-p.market.r * (p.T - t));
    InsurerControls c;
    c.pi = (p.market.mu0 - p.market.r) / (p.market.sigma0 * p.market.sigma0) * d;
    c.u = p.loadings.kappa_r * p.mu1() * lambda_t * p.cat.delta /
          (p.sigma1_sq() * p.cat.rho * p.mu2()) * d;
    c.v = (p.loadings.iota_r * p.mu2() / p.sigma2_sq() + 2.0 * dc.xi(t) * lambda_t + dc.eta(t)) *
              d / p.cat.k +
          dc.alpha(t) * disc / p.cat.k;
    return c;
}

DiffusionAdversary diffusion_adversary(const ModelParams& p,
                                       const DiffusionCoefficients& /*dc*/, double /*t*/,
                                       double lambda) {
    DiffusionAdversary b;
    b.o = -(p.market.mu0 - p.market.r) / p.market.sigma0;
    b.p = p.loadings.kappa_r * p.mu1() * lambda /
          (std::sqrt(p.sigma1_sq()) * std::sqrt(p.cat.rho * p.mu2() / p.cat.delta));
    b.q = p.loadings.iota_r * p.mu2() * std::sqrt(p.cat.rho) / std::sqrt(p.sigma2_sq());
    return b;
}

double diffusion_value(const ModelParams& /*params*/, const DiffusionCoefficients& dc,
                       const Anchor& a, double t, double x, double lambda_t) {
    // Factored form of [c^2 - (G x + I)^2] / (4 H); see the jump-model value
    // function for the grouping rationale.
    const double h_s = dc.H(a.s, a.lambda_s);
    const double h_t = dc.H(t, lambda_t);
    const double anchor_gx = dc.G(a.s) * a.x_s;
    const double anchor_i = dc.I(a.s, a.lambda_s);
    const double gx = dc.G(t) * x;
    const double i_t = dc.I(t, lambda_t);
    const double d_linear = (anchor_gx - gx) + (anchor_i - i_t);
    const double sum = anchor_gx + anchor_i + 2.0 * h_s * a.y_s + gx + i_t;
    return d_linear * sum / (4.0 * h_t) + a.y_s * (h_s / h_t) * sum / 2.0;
}

}  // namespace catmmv
