#pragma once

#include <cstddef>
#include <vector>

#include "catmmv/model.hpp"
#include "catmmv/strategies.hpp"

namespace catmmv {

enum class DeltaBranch { DeltaZero, DeltaPositive };

struct Discriminant {
    double Delta = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// Discriminant and characteristic roots of the retention Riccati equation.
// Throws ConditionViolated when Delta < 0 (the closed-form hypothesis
// delta mu2 / sigma2^2 >= 2 kappa_r^2 mu1^2 / sigma1^2 fails).
Discriminant discriminant(const ModelParams& p);

// Time coefficients of the diffusion-approximation model.  xi and eta are closed
// forms per branch; zeta is tabulated by quadrature with exact recomputation on
// demand; alpha and beta coincide with the jump model's.
class DiffusionCoefficients {
public:
    DiffusionCoefficients(ModelParams params, std::size_t n_grid = 2001);

    const ModelParams& params() const { return params_; }
    DeltaBranch branch() const { return branch_; }
    const Discriminant& disc() const { return disc_; }

    double xi(double t) const;
    double eta(double t) const;
    double zeta(double t) const;        // interpolated
    double zeta_exact(double t) const;  // fresh quadrature
    double alpha(double t) const;
    double beta(double t) const;

    double G(double t) const;
    double H(double t, double lambda) const;  // (1/2theta) e^{xi l^2 + eta l + zeta}
    double H_lambda(double t, double lambda) const;
    double I(double t, double lambda) const;

    const std::vector<double>& grid() const { return grid_; }

private:
    ModelParams params_;
    Discriminant disc_;
    DeltaBranch branch_ = DeltaBranch::DeltaPositive;
    std::vector<double> grid_;
    std::vector<double> zeta_;
    double dt_ = 0.0;
};

DiffusionCoefficients diffusion_coefficients(const ModelParams& params,
                                             std::size_t n_grid = 2001);

// Feedback (y-form) optimal insurer controls of the diffusion model; the pair
// that, together with diffusion_adversary, conserves G X + 2 Y H + I along paths.
InsurerControls diffusion_feedback_controls(const ModelParams& p,
                                            const DiffusionCoefficients& dc, double t, double y,
                                            double lambda);

// Precommitted (x-form) insurer controls anchored at (s, x_s, y_s, lambda_s).
InsurerControls diffusion_controls(const ModelParams& p, const DiffusionCoefficients& dc,
                                   const Anchor& anchor, double t, double x, double lambda_t);

// Optimal adversary tilts (all scalar in this model; p depends on lambda).
struct DiffusionAdversary {
    double o = 0.0;
    double p = 0.0;
    double q = 0.0;
};
DiffusionAdversary diffusion_adversary(const ModelParams& p, const DiffusionCoefficients& dc,
                                       double t, double lambda);

double diffusion_value(const ModelParams& p, const DiffusionCoefficients& dc,
                       const Anchor& anchor, double t, double x, double lambda_t);

}  // namespace catmmv
