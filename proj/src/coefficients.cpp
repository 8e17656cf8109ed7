#include "catmmv/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "catmmv/errors.hpp"
#include "catmmv/quadrature.hpp"

namespace catmmv {

double expm1_over_x(double x) {
    if (std::abs(x) < 1e-12) return 1.0 + 0.5 * x;
    return std::expm1(x) / x;
}

namespace {

// (1 - e^{-d tau}) / d, finite at d = 0 where it equals tau.
double decay_integral(double d, double tau) {
    return tau * expm1_over_x(-d * tau);
}

}  // namespace

double eta(const ModelParams& p, double t) {
    const double tau = p.T - t;
    const double kr = p.loadings.kappa_r;
    const double c = kr * kr * p.mu1() * p.mu1() / p.sigma1_sq();
    return c * decay_integral(p.cat.delta, tau);
}

double phi(const ModelParams& p, double t) {
    const double e = eta(p, t);
    const double m1 = p.claims_catastrophe.tilted_moment(1, e);
    const double m2 = p.claims_catastrophe.tilted_moment(2, e);
    return ((p.loadings.iota_r + 1.0) * p.mu2() - m1) / m2;
}

double zeta(const ModelParams& p, double t) {
    const double tau = p.T - t;
    const double mkt = (p.market.mu0 - p.market.r) * (p.market.mu0 - p.market.r) /
                       (p.market.sigma0 * p.market.sigma0);
    double integral = 0.0;
    if (p.cat.rho > 0.0) {
        integral = integrate(
            [&](double s) {
                const double e = eta(p, s);
                const double ph = phi(p, s);
                return ph * ph * p.claims_catastrophe.tilted_moment(2, e) -
                       p.claims_catastrophe.tilted_moment(0, e);
            },
            t, p.T);
    }
    return p.cat.rho * integral + (p.cat.rho + mkt) * tau;
}

double alpha(const ModelParams& p, double t) {
    const double tau = p.T - t;
    const double d = p.cat.delta;
    const double r = p.market.r;
    // e^{-d tau} - e^{r tau} = -e^{-d tau} expm1((d + r) tau)
    const double diff = -std::exp(-d * tau) * std::expm1((d + r) * tau);
    return (p.loadings.kappa_r - p.loadings.kappa) * p.mu1() / (d + r) * diff;
}

double beta_fn(const ModelParams& p, double t) {
    // beta(t) = rho int_t^T { alpha(s) mu2 (iota_r + 1) - (iota_r - iota) k mu2 e^{r(T-s)} } ds,
    // beta(T) = 0.  Both pieces in closed form.
    const double tau = p.T - t;
    const double d = p.cat.delta;
    const double r = p.market.r;
    const double rho = p.cat.rho;
    const double mu1 = p.mu1();
    const double mu2 = p.mu2();
    const double dk = p.loadings.kappa_r - p.loadings.kappa;
    const double di = p.loadings.iota_r - p.loadings.iota;
    // int_t^T alpha = dk mu1 / (d + r) * [ (1 - e^{-d tau})/d - (e^{r tau} - 1)/r ]
    const double int_alpha =
        dk * mu1 / (d + r) * (decay_integral(d, tau) - tau * expm1_over_x(r * tau));
    const double int_exp = tau * expm1_over_x(r * tau);  // int_t^T e^{r(T-s)} ds
    return rho * (p.loadings.iota_r + 1.0) * mu2 * int_alpha - rho * di * p.cat.k * mu2 * int_exp;
}

CoefficientCurves::CoefficientCurves(ModelParams params, std::size_t n_grid)
    : params_(std::move(params)) {
    if (n_grid < 2) throw Error("coefficient grid needs at least 2 points");
    grid_.resize(n_grid);
    eta_.resize(n_grid);
    zeta_.resize(n_grid);
    alpha_.resize(n_grid);
    beta_.resize(n_grid);
    phi_.resize(n_grid);
    dt_ = params_.T / static_cast<double>(n_grid - 1);
    for (std::size_t i = 0; i < n_grid; ++i) {
        const double t = (i + 1 == n_grid) ? params_.T
                                           : params_.T * static_cast<double>(i) /
                                                 static_cast<double>(n_grid - 1);
        grid_[i] = t;
        eta_[i] = catmmv::eta(params_, t);
        zeta_[i] = catmmv::zeta(params_, t);
        alpha_[i] = catmmv::alpha(params_, t);
        beta_[i] = catmmv::beta_fn(params_, t);
        phi_[i] = catmmv::phi(params_, t);
    }
}

double CoefficientCurves::interp(const std::vector<double>& v, double t) const {
    if (t <= 0.0) return v.front();
    if (t >= params_.T) return v.back();
    const double pos = t / dt_;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) i = v.size() - 2;
    const double w = (t - grid_[i]) / dt_;
    return v[i] + w * (v[i + 1] - v[i]);
}

CoefficientCurves build_curves(const ModelParams& params, std::size_t n_grid) {
    return CoefficientCurves(params, n_grid);
}

double Ghik::G(double t) const { return std::exp(params_.market.r * (params_.T - t)); }

double Ghik::H(double t, double lambda) const {
    return std::exp(eta(params_, t) * lambda + zeta(params_, t)) / (2.0 * params_.theta);
}

double Ghik::I(double t, double lambda) const {
    return alpha(params_, t) * lambda + beta_fn(params_, t);
}

}  // namespace catmmv
