#pragma once

#include <functional>

#include "catmmv/coefficients.hpp"
#include "catmmv/model.hpp"

namespace catmmv {

// Insurer controls: investment amount and the two proportional retentions.
// All unconstrained reals; retentions may leave [0, 1].
struct InsurerControls {
    double pi = 0.0;  // amount in the risky asset
    double u = 0.0;   // ordinary-claim retention
    double v = 0.0;   // catastrophe-claim retention
};

// Adversary (density-process) controls: Brownian tilt and jump tilts.
struct AdversaryControls {
    double o = 0.0;
    std::function<double(double)> p;  // ordinary-jump tilt, p(z) >= -1
    std::function<double(double)> q;  // catastrophe-jump tilt, q(z) >= -1
};

// State snapshot the precommitted strategies are anchored to.
struct Anchor {
    double s = 0.0;
    double x_s = 0.0;
    double y_s = 1.0;
    double lambda_s = 1.0;
};

inline Anchor anchor_of(const ModelParams& p) { return {p.s, p.x0, p.y0, p.lambda0}; }

// Feedback (y-form) optimal insurer controls.  The catastrophe retention uses the
// closed reduction v = (2 H phi y + alpha) / (k G); with verify_by_quadrature the
// ratio-of-integrals route is evaluated as well and a disagreement beyond 1e-9
// relative is an error.
InsurerControls feedback_controls_y(const ModelParams& params, const CoefficientCurves& curves,
                                    double t, double y, double lambda,
                                    bool verify_by_quadrature = false);

// Optimal adversary controls at time t.
AdversaryControls adversary_controls(const ModelParams& params, const CoefficientCurves& curves,
                                     double t);

// Precommitted (x-form) optimal insurer controls, anchored at (s, x_s, y_s, lambda_s).
InsurerControls precommitted_controls(const ModelParams& params, const CoefficientCurves& curves,
                                      const Anchor& anchor, double t, double x, double lambda_t);

// The common bracket that multiplies the strategy slopes; exposed for tests.
double precommitted_bracket(const ModelParams& params, const Anchor& anchor, double t, double x,
                            double lambda_t);

// Game value at (t, x) given the anchor:
//   W = [c^2 - (G x + I)^2] / (4 H) with c = G(s) x_s + 2 H(s, lambda_s) y_s + I(s, lambda_s).
double value_function(const ModelParams& params, const CoefficientCurves& curves,
                      const Anchor& anchor, double t, double x, double lambda_t);

// Value of the monotone mean-variance problem from the configured initial state:
// anchor (s, x0, y0, lambda0) evaluated at t = s, x = x0.
double mmv_value(const ModelParams& params, const CoefficientCurves& curves);

}  // namespace catmmv
