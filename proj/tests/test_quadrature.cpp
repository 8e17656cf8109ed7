#include <doctest.h>

#include <cmath>

#include "catmmv/errors.hpp"
#include "catmmv/quadrature.hpp"

using namespace catmmv;

TEST_CASE("finite interval integrals") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, 3.141592653589793) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("adaptive refinement handles a sharp peak") {
    const double v = integrate([](double x) { return std::exp(-1000.0 * (x - 0.3) * (x - 0.3)); },
                               0.0, 1.0);
    CHECK(v == doctest::Approx(std::sqrt(3.141592653589793 / 1000.0)).epsilon(1e-8));
}

TEST_CASE("upper-infinite transform integrates exponential tails") {
    CHECK(integrate_upper_infinite([](double z) { return std::exp(-z); }, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate_upper_infinite([](double z) { return z * z * 0.3 * std::exp(-0.3 * z); },
                                   0.0) == doctest::Approx(2.0 / 0.09).epsilon(1e-10));
}

TEST_CASE("subdivision budget failure raises") {
    QuadratureOptions opts;
    opts.abs_tol = 1e-300;
    opts.max_subdivisions = 4;
    CHECK_THROWS_AS(integrate([](double x) { return std::sqrt(std::abs(x)); }, -1.0, 1.0, opts),
                    QuadratureFailure);
}
