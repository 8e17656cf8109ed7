#include "catmmv/distribution.hpp"

#include <cmath>
#include <stdexcept>

#include "catmmv/errors.hpp"
#include "catmmv/quadrature.hpp"

namespace catmmv {

ClaimDistribution ClaimDistribution::exponential(double rate) {
    if (!(rate > 0.0)) throw ValidationError("claim rate", "> 0");
    ClaimDistribution d;
    d.kind_ = Kind::Exponential;
    d.rate_ = rate;
    d.name_ = "exponential";
    return d;
}

ClaimDistribution ClaimDistribution::generic(Density density, Sampler inverse_cdf,
                                             std::string name) {
    if (!density) throw ValidationError("claim density", "required for generic law");
    ClaimDistribution d;
    d.kind_ = Kind::Generic;
    d.density_ = std::move(density);
    d.sampler_ = std::move(inverse_cdf);
    d.name_ = std::move(name);
    return d;
}

double ClaimDistribution::mean() const { return tilted_moment(1, 0.0); }

double ClaimDistribution::second_moment() const { return tilted_moment(2, 0.0); }

double ClaimDistribution::tilted_moment(int m, double a) const {
    if (m < 0 || m > 3) throw Error("tilted moment order must be in 0..3");
    if (!(a >= 0.0)) throw Error("tilted moment requires a >= 0");
    if (kind_ == Kind::Exponential) {
        const double c = rate_ + a;
        switch (m) {
            case 0: return rate_ / c;
            case 1: return rate_ / (c * c);
            case 2: return 2.0 * rate_ / (c * c * c);
            default: return 6.0 * rate_ / (c * c * c * c);
        }
    }
    QuadratureOptions opts;
    opts.abs_tol = 0.0;
    opts.rel_tol = 1e-10;
    return integrate_upper_infinite(
        [&](double z) { return std::pow(z, m) * std::exp(-a * z) * density_(z); }, 0.0, opts);
}

double ClaimDistribution::sample(double u) const {
    if (kind_ == Kind::Exponential) {
        // -log(1-u)/rate; u in [0,1)
        return -std::log1p(-u) / rate_;
    }
    if (!sampler_) throw Error("generic claim law has no sampler");
    return sampler_(u);
}

double ClaimDistribution::density(double z) const {
    if (kind_ == Kind::Exponential) return z >= 0.0 ? rate_ * std::exp(-rate_ * z) : 0.0;
    return density_(z);
}

double ClaimDistribution::effective_support_bound(double density_floor) const {
    if (kind_ == Kind::Exponential) {
        return std::max(1.0, -std::log(density_floor / rate_) / rate_);
    }
    double z = 1.0;
    while (density_(z) > density_floor && z < 1e9) z *= 1.25;
    return z;
}

}  // namespace catmmv
