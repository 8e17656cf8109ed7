#include "catmmv/model.hpp"

#include <cmath>
#include <vector>

#include "catmmv/errors.hpp"

namespace catmmv {

ModelParams validate(const ModelParams& params) {
    std::vector<Violation> bad;
    auto require = [&](bool ok, const char* field, const char* constraint) {
        if (!ok) bad.push_back({field, constraint});
    };
    require(params.market.sigma0 > 0.0, "sigma0", "> 0");
    require(params.market.r > 0.0, "r", "> 0");
    require(params.loadings.kappa >= 0.0, "kappa", ">= 0");
    require(params.loadings.iota >= 0.0, "iota", ">= 0");
    if (!params.allow_cheap_reinsurance) {
        require(params.loadings.kappa_r >= params.loadings.kappa, "kappa_r", ">= kappa");
        require(params.loadings.iota_r >= params.loadings.iota, "iota_r", ">= iota");
    }
    require(params.cat.rho >= 0.0, "rho", ">= 0");
    require(params.cat.delta >= 0.0, "delta", ">= 0");
    require(params.cat.k > 0.0, "k", "> 0");
    require(params.theta > 0.0, "theta", "> 0");
    require(params.T > 0.0, "T", "> 0");
    require(params.s >= 0.0 && params.s < params.T, "s", "in [0, T)");
    require(params.lambda0 > 0.0, "lambda0", "> 0");
    require(params.y0 > 0.0, "y0", "> 0");
    require(std::isfinite(params.x0), "x0", "finite");
    if (!bad.empty()) throw ValidationError(bad);
    return params;
}

RawMoments raw_moments(const ClaimDistribution& dist) {
    return {dist.mean(), dist.second_moment()};
}

}  // namespace catmmv
