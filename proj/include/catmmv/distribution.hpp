#pragma once

#include <functional>
#include <string>

namespace catmmv {

// Claim-size law on (0, inf).  Exposes raw moments and the exponentially tilted
// moments M(m, a) = int z^m e^{-a z} F(dz) that appear throughout the coefficient
// functions.  Exponential laws use closed forms; generic laws integrate their
// density adaptively.
class ClaimDistribution {
public:
    enum class Kind { Exponential, Generic };

    using Density = std::function<double(double)>;
    // Maps a uniform(0,1) draw to a sample; keeps sampling deterministic per path.
    using Sampler = std::function<double(double)>;

    static ClaimDistribution exponential(double rate);
    static ClaimDistribution generic(Density density, Sampler inverse_cdf,
                                     std::string name = "generic");

    Kind kind() const { return kind_; }
    double rate() const { return rate_; }
    const std::string& name() const { return name_; }

    double mean() const;           // int z F(dz)
    double second_moment() const;  // int z^2 F(dz)

    // Tilted moment M(m, a) for m in 0..3, a >= 0.
    double tilted_moment(int m, double a) const;

    // Sample from a uniform(0,1) draw.
    double sample(double u) const;

    // Density evaluation (closed form for the exponential kind).
    double density(double z) const;

    // Upper bound of the law's effective support: the density stays below the
    // floor beyond it.  Jump-integral quadratures truncate here, keeping
    // exp-overflow-prone integrands out of the numerically irrelevant far tail.
    double effective_support_bound(double density_floor = 1e-120) const;

private:
    ClaimDistribution() = default;

    Kind kind_ = Kind::Exponential;
    double rate_ = 1.0;
    Density density_;
    Sampler sampler_;
    std::string name_ = "exponential";
};

}  // namespace catmmv
