#pragma once

#include <functional>
#include <string>
#include <vector>

#include "catmmv/coefficients.hpp"
#include "catmmv/diffusion.hpp"
#include "catmmv/model.hpp"
#include "catmmv/simulate.hpp"
#include "catmmv/strategies.hpp"

namespace catmmv {

// Candidate value function W(t, x, y, lambda).
using StateFn = std::function<double(double, double, double, double)>;

// The separated closed-form candidate G x y + H y^2 + I y, with the time
// quadratures memoized so finite differencing stays affordable.
StateFn make_candidate_value(const ModelParams& p);

struct GeneratorOptions {
    double fd_step = 1e-5;        // relative step for the finite differences
    double quad_rel_tol = 1e-9;   // jump-integral tolerance
};

// Infinitesimal generator of (X, Y, lambda) applied to W at a point, for
// insurer controls a and adversary controls b.  Derivatives by central
// differences, jump integrals by adaptive quadrature.
double generator_apply(const ModelParams& p, const StateFn& W, const InsurerControls& a,
                       const AdversaryControls& b, double t, double x, double y, double lambda,
                       const GeneratorOptions& opts = {});

struct ResidualRow {
    double t = 0.0, x = 0.0, y = 0.0, lambda = 0.0;
    double residual = 0.0;  // absolute
    double scale = 0.0;     // sum of |generator terms|
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double max_abs = 0.0;
    double max_rel = 0.0;
    ResidualRow worst;
    bool sup_check_ok = true;   // L^{a*, b} W >= -tol for sampled admissible b
    bool inf_check_ok = true;   // L^{a, b*} W <= tol for sampled admissible a
};

struct HjbiGrid {
    std::vector<double> ts, xs, ys, lambdas;
    std::size_t n_spot_checks = 20;
    double spot_tol = 1e-5;
    std::uint64_t seed = 20240915;
};

// Default grid: 10 x 5 x 3 x 5 points over [0, 0.95 T] x wealth x density x intensity.
HjbiGrid standard_hjbi_grid(const ModelParams& p);

ResidualReport hjbi_residual_report(const ModelParams& p, const CoefficientCurves& curves,
                                    const HjbiGrid& grid);

// Same report for a perturbed candidate (H scaled by 1 + eps); negative control.
ResidualReport hjbi_residual_report_perturbed(const ModelParams& p,
                                              const CoefficientCurves& curves,
                                              const HjbiGrid& grid, double h_scale);

// --- closed-form residual suites -----------------------------------------------

struct OdeResiduals {
    double eta = 0.0, zeta = 0.0, alpha = 0.0, beta = 0.0;  // max scaled residuals
};
// Backward-ODE residuals of the five jump-model coefficients, central
// differences of step h on the closed forms, at n interior points.
OdeResiduals coefficient_ode_residuals(const ModelParams& p, int n_interior, double h = 1e-5);

// Relative residuals of the separated H-, I- and K-equations at one point.
double pde_residual_H(const ModelParams& p, double t, double lambda);
double pde_residual_I(const ModelParams& p, double t, double lambda);
double k_equation_bracket(const ModelParams& p, double t, double lambda);

struct RiccatiResiduals {
    double xi = 0.0, eta = 0.0, zeta = 0.0;
};
RiccatiResiduals diffusion_ode_residuals(const ModelParams& p, const DiffusionCoefficients& dc,
                                         int n_interior, double h = 1e-5);

double diffusion_pde_residual_H(const ModelParams& p, const DiffusionCoefficients& dc, double t,
                                double lambda);
double diffusion_pde_residual_I(const ModelParams& p, const DiffusionCoefficients& dc, double t,
                                double lambda);

// --- saddle point ---------------------------------------------------------------

struct SaddleRow {
    std::string label;
    double objective = 0.0;   // MC estimate of J for the perturbed pair
    double diff = 0.0;        // paired-difference estimate J_perturbed - J_optimal
    double diff_se = 0.0;
    bool ok = true;           // inequality holds within 3 SE
};

struct SaddleReport {
    double optimal_objective = 0.0;
    double optimal_se = 0.0;
    std::vector<SaddleRow> insurer_rows;    // require diff <= 3 se
    std::vector<SaddleRow> adversary_rows;  // require diff >= -3 se
    bool ok = true;
};

// Monte Carlo check of J^{a, b*} <= J^{a*, b*} <= J^{a*, b} with common random
// numbers across the strategy variants.
SaddleReport saddle_check(const ModelParams& p, const CoefficientCurves& curves,
                          const SimConfig& config);

// --- integrability monitor -------------------------------------------------------

struct IntegrabilityRow {
    int n = 0;                 // stopping level: zeta_n = inf { t : Y <= 1/n }
    double stop_time = 0.0;    // min(zeta_n, T)
    bool truncated = false;    // zeta_n < T
    double integral = 0.0;     // stopped tilt integral
};

struct IntegrabilityReport {
    std::vector<IntegrabilityRow> rows;
    double min_Y = 0.0;
};

// Evaluates the stopped integrals int o^2 dt + int int (1 - sqrt(p+1))^2 lambda F1
// + int int (1 - sqrt(q+1))^2 rho F2 along one simulated path for n in {10, 100, 1000}.
IntegrabilityReport integrability_monitor(const ModelParams& p, const CoefficientCurves& curves,
                                          const Adversary& adversary, const SimConfig& config,
                                          std::size_t path_index);

}  // namespace catmmv
