#include <doctest.h>

#include <cmath>

#include "catmmv/errors.hpp"
#include "catmmv/model.hpp"
#include "catmmv/quadrature.hpp"
#include "support/oracles.hpp"

using namespace catmmv;

TEST_CASE("section-5 parameter set validates") {
    CHECK_NOTHROW(validate(oracles::section5_params()));
}

TEST_CASE("validation collects every violation") {
    ModelParams p = oracles::section5_params();
    p.market.sigma0 = 0.0;
    p.theta = -1.0;
    try {
        validate(p);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE(e.violations().size() == 2);
        CHECK(e.violations()[0].field == "sigma0");
        CHECK(e.violations()[0].constraint == "> 0");
        CHECK(e.violations()[1].field == "theta");
    }
}

TEST_CASE("cheap reinsurance rejected unless explicitly allowed") {
    ModelParams p = oracles::section5_params();
    p.loadings.kappa_r = 0.05;  // below kappa
    CHECK_THROWS_AS(validate(p), ValidationError);
    p.allow_cheap_reinsurance = true;
    CHECK_NOTHROW(validate(p));
}

TEST_CASE("raw moments of exponential laws") {
    const auto m02 = raw_moments(ClaimDistribution::exponential(0.2));
    CHECK(m02.mu == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(m02.sigma2 == doctest::Approx(50.0).epsilon(1e-14));
    const auto m03 = raw_moments(ClaimDistribution::exponential(0.3));
    CHECK(m03.mu == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
    CHECK(m03.sigma2 == doctest::Approx(200.0 / 9.0).epsilon(1e-14));
    const auto m1 = raw_moments(ClaimDistribution::exponential(1.0));
    CHECK(m1.mu == doctest::Approx(1.0));
    CHECK(m1.sigma2 == doctest::Approx(2.0));
}

TEST_CASE("tilted moments: closed forms vs direct quadrature") {
    const ClaimDistribution f2 = ClaimDistribution::exponential(0.3);
    CHECK(f2.tilted_moment(0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f2.tilted_moment(1, 0.348456) == doctest::Approx(0.713444).epsilon(1e-5));
    CHECK(f2.tilted_moment(2, 0.348456) == doctest::Approx(2.20045).epsilon(1e-5));

    for (int m = 0; m <= 3; ++m) {
        for (double a : {0.0, 0.05, 0.348456, 2.0}) {
            const double direct = oracles::simpson_auto(
                [&](double z) { return std::pow(z, m) * std::exp(-a * z) * 0.3 *
                                       std::exp(-0.3 * z); },
                0.0, 400.0, 1e-13);
            CHECK(f2.tilted_moment(m, a) ==
                  doctest::Approx(direct).epsilon(1e-9));
        }
    }
}

TEST_CASE("generic law agrees with its exponential counterpart") {
    const double rate = 0.3;
    const ClaimDistribution generic = ClaimDistribution::generic(
        [rate](double z) { return z >= 0.0 ? rate * std::exp(-rate * z) : 0.0; },
        [rate](double u) { return -std::log1p(-u) / rate; }, "exp-as-generic");
    const ClaimDistribution exact = ClaimDistribution::exponential(rate);
    for (int m = 0; m <= 3; ++m) {
        for (double a : {0.0, 0.1, 0.7}) {
            CHECK(generic.tilted_moment(m, a) ==
                  doctest::Approx(exact.tilted_moment(m, a)).epsilon(1e-9));
        }
    }
}

TEST_CASE("tilted moments decrease in the tilt and satisfy Cauchy-Schwarz") {
    const ClaimDistribution f = ClaimDistribution::exponential(0.2);
    for (int m = 0; m <= 3; ++m) {
        double prev = f.tilted_moment(m, 0.0);
        for (double a : {0.1, 0.5, 1.0, 3.0}) {
            const double cur = f.tilted_moment(m, a);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    for (double a : {0.0, 0.2, 1.5}) {
        const double m0 = f.tilted_moment(0, a);
        const double m1 = f.tilted_moment(1, a);
        const double m2 = f.tilted_moment(2, a);
        CHECK(m1 * m1 <= m0 * m2 * (1.0 + 1e-12));
    }
}

TEST_CASE("tilted moment argument checks") {
    const ClaimDistribution f = ClaimDistribution::exponential(1.0);
    CHECK_THROWS(f.tilted_moment(4, 0.0));
    CHECK_THROWS(f.tilted_moment(1, -0.5));
}
