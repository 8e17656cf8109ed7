#pragma once

#include "catmmv/coefficients.hpp"
#include "catmmv/model.hpp"
#include "catmmv/strategies.hpp"

namespace catmmv {

// One point of the mean-variance locus of the optimally controlled wealth.
struct FrontierPoint {
    double t = 0.0;
    double mean_P = 0.0;  // E^P X*(t)
    double mean_Q = 0.0;  // E^{Q*} X*(t)
    double var_P = 0.0;   // Var^P X*(t)
};

// Auxiliary exponent functions; psi1 in closed form, psi2/psi3 by adaptive
// quadrature of the tilted-moment expansion of their double integrals.
double psi1(const ModelParams& p, double s, double t);
double psi2(const ModelParams& p, double s, double t);
double psi3(const ModelParams& p, double s, double t);
double psi(const ModelParams& p, const CoefficientCurves& curves, double s, double t, int which);

struct FrontierConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
};

// The parabola constants of the variance-mean relationship.  Throws
// DegenerateWindow at t == s and ConditionViolated if the C1 numerator
// e0 e3 - e2^2 turns out negative.
FrontierConstants frontier_constants(const ModelParams& p, const CoefficientCurves& curves,
                                     double s, double t, double lambda);

// Intensity moments under P and under the optimal alternative measure.
double mean_lambda(const ModelParams& p, double s, double t, double lambda);
double second_moment_lambda(const ModelParams& p, double s, double t, double lambda);
double mean_lambda_qstar(const ModelParams& p, double s, double t, double lambda);

// Expected wealth under Q* and P, anchored at (s, x_s, y_s, lambda_s).
double mean_wealth_Q(const ModelParams& p, const CoefficientCurves& curves, const Anchor& anchor,
                     double t);
double mean_wealth_P(const ModelParams& p, const CoefficientCurves& curves, const Anchor& anchor,
                     double t);

// Var^P X*(t) = C1 (mean_P_observed - E^{Q*}X*(t) - C2)^2 + C3.
double variance_relation(const ModelParams& p, const CoefficientCurves& curves,
                         const Anchor& anchor, double t, double mean_P_observed);

// Independent closed route for Var^P X*(t) via the variance decomposition of
// G X = c - 2 Y H - I; used to cross-check variance_relation.
double var_wealth_P_direct(const ModelParams& p, const CoefficientCurves& curves,
                           const Anchor& anchor, double t);

struct YhMoments {
    double yh = 0.0;      // E^P[ Y* H ]
    double yh_sq = 0.0;   // E^P[ (Y* H)^2 ]
    double lam_yh = 0.0;  // E^P[ lambda Y* H ]
};

YhMoments yh_moments(const ModelParams& p, const CoefficientCurves& curves, double s, double t,
                     double lambda, double y);

FrontierPoint frontier_point(const ModelParams& p, const CoefficientCurves& curves,
                             const Anchor& anchor, double t);

}  // namespace catmmv
