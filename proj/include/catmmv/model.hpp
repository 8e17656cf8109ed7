#pragma once

#include "catmmv/distribution.hpp"

namespace catmmv {

// Risky/risk-free market parameters, per month.
struct MarketParams {
    double mu0 = 0.0;    // risky-asset drift
    double sigma0 = 1.0; // risky-asset volatility (> 0)
    double r = 0.0;      // risk-free rate (> 0)
};

// Safety loadings: insurer (kappa, iota) and reinsurer (kappa_r, iota_r).
struct LoadingParams {
    double kappa = 0.0;
    double kappa_r = 0.0;
    double iota = 0.0;
    double iota_r = 0.0;
};

// Catastrophe arrival/decay/claim-scale parameters.
struct CatastropheParams {
    double rho = 0.0;   // catastrophe Poisson intensity (>= 0)
    double delta = 0.0; // intensity decay factor (>= 0)
    double k = 1.0;     // catastrophe-impact-to-claim scale (> 0)
};

struct ModelParams {
    MarketParams market;
    LoadingParams loadings;
    CatastropheParams cat;
    ClaimDistribution claims_ordinary = ClaimDistribution::exponential(1.0);     // U_i ~ F1
    ClaimDistribution claims_catastrophe = ClaimDistribution::exponential(1.0);  // V_i ~ F2
    double theta = 1.0;   // risk aversion (> 0)
    double T = 1.0;       // horizon in months (> 0)
    double s = 0.0;       // anchor time (0 <= s < T)
    double x0 = 0.0;      // initial wealth
    double lambda0 = 1.0; // initial intensity (> 0)
    double y0 = 1.0;      // initial density value (> 0)

    // Disables the kappa_r >= kappa, iota_r >= iota check.
    bool allow_cheap_reinsurance = false;

    double mu1() const { return claims_ordinary.mean(); }
    double sigma1_sq() const { return claims_ordinary.second_moment(); }
    double mu2() const { return claims_catastrophe.mean(); }
    double sigma2_sq() const { return claims_catastrophe.second_moment(); }
};

// Returns params unchanged if every invariant holds; otherwise throws a
// ValidationError listing all violations.
ModelParams validate(const ModelParams& params);

// Convenience: the section-5 style raw moments as a pair (mu, sigma^2-raw).
struct RawMoments {
    double mu;
    double sigma2;
};
RawMoments raw_moments(const ClaimDistribution& dist);

}  // namespace catmmv
