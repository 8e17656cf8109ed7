#pragma once

#include <cstddef>
#include <vector>

#include "catmmv/model.hpp"

namespace catmmv {

// Closed-form time coefficients of the jump model.  All satisfy zero terminal
// data at t = T.  delta = 0 and rho = 0 limits are handled with expm1-style
// forms, never by special-casing at the call site.
double eta(const ModelParams& p, double t);
double phi(const ModelParams& p, double t);
double zeta(const ModelParams& p, double t);   // adaptive quadrature, abs tol 1e-10
double alpha(const ModelParams& p, double t);
double beta_fn(const ModelParams& p, double t);

// Tabulated coefficient curves on a uniform grid over [0, T], with piecewise
// linear interpolation for simulation inner loops and exact recomputation for
// accuracy-critical paths.
class CoefficientCurves {
public:
    CoefficientCurves(ModelParams params, std::size_t n_grid);

    const ModelParams& params() const { return params_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& eta_values() const { return eta_; }
    const std::vector<double>& zeta_values() const { return zeta_; }
    const std::vector<double>& alpha_values() const { return alpha_; }
    const std::vector<double>& beta_values() const { return beta_; }
    const std::vector<double>& phi_values() const { return phi_; }

    // Piecewise-linear interpolation; O(1) on the uniform grid.
    double eta(double t) const { return interp(eta_, t); }
    double zeta(double t) const { return interp(zeta_, t); }
    double alpha(double t) const { return interp(alpha_, t); }
    double beta(double t) const { return interp(beta_, t); }
    double phi(double t) const { return interp(phi_, t); }

    // Exact closed-form recomputation.
    double eta_exact(double t) const { return catmmv::eta(params_, t); }
    double zeta_exact(double t) const { return catmmv::zeta(params_, t); }
    double alpha_exact(double t) const { return catmmv::alpha(params_, t); }
    double beta_exact(double t) const { return catmmv::beta_fn(params_, t); }
    double phi_exact(double t) const { return catmmv::phi(params_, t); }

private:
    double interp(const std::vector<double>& v, double t) const;

    ModelParams params_;
    std::vector<double> grid_;
    double dt_ = 0.0;
    std::vector<double> eta_, zeta_, alpha_, beta_, phi_;
};

CoefficientCurves build_curves(const ModelParams& params, std::size_t n_grid);

// The separated value-function coefficients: G(t) = e^{r(T-t)},
// H(t,lambda) = e^{eta lambda + zeta} / (2 theta), I = alpha lambda + beta, K = 0.
// Evaluates from closed forms (zeta by quadrature per call).
class Ghik {
public:
    explicit Ghik(ModelParams params) : params_(std::move(params)) {}

    double G(double t) const;
    double H(double t, double lambda) const;
    double I(double t, double lambda) const;
    double K(double t, double lambda) const { (void)t; (void)lambda; return 0.0; }

    const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
};

inline Ghik ghik(const ModelParams& /*params*/, const CoefficientCurves& curves) {
    return Ghik(curves.params());
}

// expm1(x)/x with the x -> 0 limit; building block for the decay-limit forms.
double expm1_over_x(double x);

}  // namespace catmmv
