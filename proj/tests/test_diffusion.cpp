#include <doctest.h>

#include <cmath>
#include <vector>

#include "catmmv/diffusion.hpp"
#include "catmmv/errors.hpp"
#include "support/oracles.hpp"

using namespace catmmv;

namespace {

// Backward RK4 oracle for the (xi, eta) Riccati/linear system.
std::pair<double, double> riccati_oracle(const ModelParams& p, double t_eval,
                                         int n_steps = 40000) {
    const double c = p.loadings.kappa_r * p.loadings.kappa_r * p.mu1() * p.mu1() * p.cat.delta /
                     (p.cat.rho * p.mu2() * p.sigma1_sq());
    auto rhs = [&](double, const std::vector<double>& y) {
        const double xi = y[0], e = y[1];
        return std::vector<double>{
            2.0 * p.cat.delta * xi - 2.0 * p.cat.rho * p.sigma2_sq() * xi * xi - c,
            (p.cat.delta - 2.0 * p.cat.rho * p.sigma2_sq() * xi) * e -
                2.0 * p.cat.rho * p.mu2() * (2.0 * p.loadings.iota_r + 1.0) * xi};
    };
    const auto y = oracles::rk4(rhs, {0.0, 0.0}, p.T, t_eval, n_steps);
    return {y[0], y[1]};
}

// delta that makes the discriminant exactly zero for the given claim laws.
double critical_delta(const ModelParams& p) {
    return 2.0 * p.loadings.kappa_r * p.loadings.kappa_r * p.mu1() * p.mu1() * p.sigma2_sq() /
           (p.mu2() * p.sigma1_sq());
}

}  // namespace

TEST_CASE("discriminant gate: section-5 parameters fail the hypothesis") {
    const ModelParams p = oracles::section5_params();
    CHECK_THROWS_AS(discriminant(p), ConditionViolated);
}

TEST_CASE("discriminant: catastrophe-claim variant passes") {
    const ModelParams p = oracles::diffusion_variant_params();
    const Discriminant d = discriminant(p);
    CHECK(d.Delta == doctest::Approx(1.06e-4).epsilon(1e-10));
    CHECK(d.d1 > d.d2);
    CHECK(d.d2 > 0.0);
}

TEST_CASE("discriminant root at the critical decay rate") {
    ModelParams p = oracles::diffusion_variant_params();
    p.cat.delta = critical_delta(p);
    const Discriminant d = discriminant(p);
    CHECK(std::abs(d.Delta) < 1e-18);
    CHECK(d.d1 == doctest::Approx(d.d2).epsilon(1e-9));
    CHECK(d.d1 == doctest::Approx(p.cat.delta / (2.0 * p.cat.rho * p.sigma2_sq())).epsilon(1e-12));
}

TEST_CASE("coefficients vanish at the horizon") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 101);
    CHECK(dc.xi(p.T) == 0.0);
    CHECK(dc.eta(p.T) == 0.0);
    CHECK(dc.zeta_exact(p.T) == 0.0);
    CHECK(dc.alpha(p.T) == 0.0);
    CHECK(dc.beta(p.T) == 0.0);
}

TEST_CASE("xi and eta against the backward RK4 oracle, frozen values") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 101);
    for (double t : {0.0, 25.0, 75.0}) {
        const auto [xi_o, eta_o] = riccati_oracle(p, t);
        CHECK(dc.xi(t) == doctest::Approx(xi_o).epsilon(1e-8));
        CHECK(dc.eta(t) == doctest::Approx(eta_o).epsilon(1e-8));
    }
    CHECK(dc.xi(0.0) == doctest::Approx(0.792477078).epsilon(1e-8));
    CHECK(dc.eta(0.0) == doctest::Approx(0.320510321).epsilon(1e-7));
    CHECK(dc.zeta_exact(0.0) == doctest::Approx(0.422833703991).epsilon(1e-6));
}

TEST_CASE("xi stays positive and below the smaller root") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 101);
    const Discriminant d = discriminant(p);
    for (double t = 0.0; t < p.T; t += 7.0) {
        CHECK(dc.xi(t) > 0.0);
        CHECK(dc.xi(t) < d.d2);
    }
}

TEST_CASE("branch continuity at a vanishing discriminant") {
    ModelParams p0 = oracles::diffusion_variant_params();
    p0.cat.delta = critical_delta(p0);
    REQUIRE(discriminant(p0).Delta == 0.0);
    const DiffusionCoefficients exact_zero(p0, 51);
    CHECK(exact_zero.branch() == DeltaBranch::DeltaZero);

    // Perturb delta so Delta = 1e-8 exactly: 4 d^2 - 2 c d = 1e-8 with c = 2 delta0.
    const double c = 2.0 * p0.cat.delta;
    ModelParams p1 = p0;
    p1.cat.delta = (2.0 * c + std::sqrt(4.0 * c * c + 16.0 * 1e-8)) / 8.0;
    const Discriminant d1 = discriminant(p1);
    CHECK(d1.Delta == doctest::Approx(1e-8).epsilon(1e-6));
    const DiffusionCoefficients near_zero(p1, 51);
    CHECK(near_zero.branch() == DeltaBranch::DeltaPositive);

    double max_diff = 0.0;
    for (double t = 0.0; t <= p0.T; t += 0.5) {
        max_diff = std::max(max_diff, std::abs(near_zero.xi(t) - exact_zero.xi(t)));
    }
    CHECK(max_diff <= 1e-4);
}

TEST_CASE("feedback controls cancel at the bracket root") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 101);
    const Anchor a{0.0, 100.0, 1.0, 1.0};
    const double x_root = a.x_s + 2.0 * dc.H(a.s, a.lambda_s) * a.y_s / dc.G(a.s);
    const InsurerControls c = diffusion_controls(p, dc, a, a.s, x_root, a.lambda_s);
    CHECK(c.pi == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c.u == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c.v ==
          doctest::Approx(dc.alpha(a.s) * std::exp(-p.market.r * p.T) / p.cat.k).epsilon(1e-9));
}

TEST_CASE("precommitted controls: frozen regression triple") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 2001);
    const Anchor a{0.0, 100.0, 1.0, 1.0};
    const InsurerControls c = diffusion_controls(p, dc, a, 1.0, 100.0, 1.0);
    // Independent evaluation of the bracket from the RK4-verified coefficients.
    const auto [xi0, eta0] = riccati_oracle(p, 0.0);
    const auto [xi1, eta1] = riccati_oracle(p, 1.0);
    const double disc = std::exp(-p.market.r * (p.T - 1.0));
    const double h0 = std::exp(xi0 + eta0 + dc.zeta_exact(0.0)) / (2.0 * p.theta);
    const double d = -100.0 + 100.0 * std::exp(p.market.r) +
                     (2.0 * h0 + dc.alpha(0.0) + dc.beta(0.0) -
                      (dc.alpha(1.0) + dc.beta(1.0))) *
                         disc;
    CHECK(c.pi == doctest::Approx((p.market.mu0 - p.market.r) / 0.16 * d).epsilon(1e-7));
    const double u_slope =
        p.loadings.kappa_r * p.mu1() * 1.0 * p.cat.delta / (p.sigma1_sq() * p.cat.rho * p.mu2());
    CHECK(c.u == doctest::Approx(u_slope * d).epsilon(1e-7));
    const double v_slope = p.loadings.iota_r * p.mu2() / p.sigma2_sq() + 2.0 * xi1 + eta1;
    CHECK(c.v == doctest::Approx((v_slope * d + dc.alpha(1.0) * disc) / p.cat.k).epsilon(1e-7));
    // Frozen values.
    CHECK(c.pi == doctest::Approx(0.255337709379).epsilon(1e-5));
    CHECK(c.u == doctest::Approx(0.0643451027634).epsilon(1e-5));
    CHECK(c.v == doctest::Approx(0.000315912603795).epsilon(1e-4));
}

TEST_CASE("adversary tilts") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 51);
    const DiffusionAdversary b = diffusion_adversary(p, dc, 3.0, 1.0);
    CHECK(b.o == doctest::Approx(-0.05).epsilon(1e-14));
    // p tilt: kappa_r mu1 lambda / (sigma1 sqrt(rho mu2/delta)); saddle-consistent
    // with the feedback retention (no spurious factor 2).
    CHECK(b.p ==
          doctest::Approx(0.105 * 5.0 / (std::sqrt(50.0) * std::sqrt(1.0 / 3.0))).epsilon(1e-12));
    CHECK(b.p == doctest::Approx(0.12859).epsilon(1e-4));
    CHECK(b.q == doctest::Approx(0.12 * (1.0 / 3.0) * 0.1 / std::sqrt(2.0 / 9.0)).epsilon(1e-12));

    ModelParams q = p;
    q.loadings.iota_r = 0.0;
    q.loadings.iota = 0.0;
    const DiffusionCoefficients dcq(q, 51);
    CHECK(diffusion_adversary(q, dcq, 3.0, 1.0).q == 0.0);
}

TEST_CASE("value function boundary and anchor reduction") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 101);
    const Anchor aT{p.T, 2.0, 3.0, 1.0};
    CHECK(diffusion_value(p, dc, aT, p.T, 2.0, 1.0) ==
          doctest::Approx(6.0 + 4.5).epsilon(1e-12));
    const Anchor a{0.0, 100.0, 1.0, 1.0};
    const double at_anchor = diffusion_value(p, dc, a, 0.0, 100.0, 1.0);
    const double expected = (dc.G(0.0) * 100.0 + dc.I(0.0, 1.0)) * 1.0 + dc.H(0.0, 1.0);
    CHECK(at_anchor == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("kappa_r = 0 collapses the quadratic intensity exponent") {
    ModelParams p = oracles::diffusion_variant_params();
    p.loadings.kappa_r = 0.0;
    p.loadings.kappa = 0.0;
    const DiffusionCoefficients dc(p, 51);
    for (double t : {0.0, 30.0, 90.0}) CHECK(dc.xi(t) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("diffusion needs positive rho and delta") {
    ModelParams p = oracles::diffusion_variant_params();
    p.cat.rho = 0.0;
    CHECK_THROWS_AS(discriminant(p), ConditionViolated);
}
