#include <doctest.h>

#include <cmath>

#include "catmmv/verify.hpp"
#include "support/oracles.hpp"

using namespace catmmv;

namespace {

struct Fixture {
    ModelParams p = oracles::section5_params();
    CoefficientCurves curves = build_curves(p, 201);
};

}  // namespace

TEST_CASE("generator on linear test functions") {
    ModelParams p = oracles::section5_params();
    p.loadings.kappa_r = p.loadings.kappa;
    p.loadings.iota_r = p.loadings.iota;
    const CoefficientCurves curves = build_curves(p, 101);

    // W = x, all controls zero, equal loadings: only the risk-free drift remains.
    const StateFn w_x = [](double, double x, double, double) { return x; };
    const AdversaryControls b = adversary_controls(p, curves, 30.0);
    const InsurerControls a{0.0, 0.0, 0.0};
    const double g1 = generator_apply(p, w_x, a, b, 30.0, 100.0, 1.0, 1.0);
    CHECK(g1 == doctest::Approx(p.market.r * 100.0).epsilon(1e-6));

    // W = y: the density process is driftless under any compensated tilt.
    const StateFn w_y = [](double, double, double y, double) { return y; };
    const double g2 = generator_apply(p, w_y, a, b, 30.0, 100.0, 1.0, 1.0);
    CHECK(std::abs(g2) < 1e-7);
}

TEST_CASE("generator annihilates the candidate value at the saddle") {
    Fixture f;
    const StateFn w = make_candidate_value(f.p);
    const double t = 50.0, x = 100.0, y = 1.0, lam = 1.0;
    const InsurerControls a = feedback_controls_y(f.p, f.curves, t, y, lam);
    const AdversaryControls b = adversary_controls(f.p, f.curves, t);
    const double g = generator_apply(f.p, w, a, b, t, x, y, lam);
    // Scale of the competing terms is O(100) here (w_t alone is ~ r G x y).
    CHECK(std::abs(g) < 1e-4);
}

TEST_CASE("first-order stationarity of the generator at the returned controls") {
    Fixture f;
    const StateFn w = make_candidate_value(f.p);
    const double t = 40.0, x = 100.0, y = 1.0, lam = 2.0;
    const InsurerControls a_star = feedback_controls_y(f.p, f.curves, t, y, lam);
    const AdversaryControls b_star = adversary_controls(f.p, f.curves, t);
    const double scale = std::max(1.0, std::abs(generator_apply(f.p, w, a_star, b_star, t, x,
                                                                y, lam)) + 100.0);

    // Insurer directions: the generator is linear in (pi, u, v) at b*, so the
    // central difference must vanish identically.
    const double eps = 1e-3;
    for (int dir = 0; dir < 3; ++dir) {
        InsurerControls up = a_star, dn = a_star;
        (dir == 0 ? up.pi : dir == 1 ? up.u : up.v) += eps;
        (dir == 0 ? dn.pi : dir == 1 ? dn.u : dn.v) -= eps;
        const double g_up = generator_apply(f.p, w, up, b_star, t, x, y, lam);
        const double g_dn = generator_apply(f.p, w, dn, b_star, t, x, y, lam);
        CHECK(std::abs(g_up - g_dn) / (2.0 * eps) <= 1e-5 * scale);
    }

    // Adversary directions: scalar multipliers around the optimum.
    auto scaled_b = [&](double c_o, double c_p, double c_q) {
        AdversaryControls b = b_star;
        b.o = c_o * b_star.o;
        auto p0 = b_star.p;
        auto q0 = b_star.q;
        b.p = [p0, c_p](double z) { return c_p * p0(z); };
        b.q = [q0, c_q](double z) { return c_q * q0(z); };
        return b;
    };
    for (int dir = 0; dir < 3; ++dir) {
        const double co = dir == 0 ? eps : 0.0;
        const double cp = dir == 1 ? eps : 0.0;
        const double cq = dir == 2 ? eps : 0.0;
        const double g_up =
            generator_apply(f.p, w, a_star, scaled_b(1 + co, 1 + cp, 1 + cq), t, x, y, lam);
        const double g_dn =
            generator_apply(f.p, w, a_star, scaled_b(1 - co, 1 - cp, 1 - cq), t, x, y, lam);
        CHECK(std::abs(g_up - g_dn) / (2.0 * eps) <= 1e-5 * scale);
    }
}

TEST_CASE("analytic value derivatives match central differences") {
    Fixture f;
    const Ghik w = ghik(f.p, f.curves);
    const StateFn cand = make_candidate_value(f.p);
    for (double t : {10.0, 60.0}) {
        for (double lam : {0.5, 3.0}) {
            const double x = 90.0, y = 1.3;
            const double wx_analytic = w.G(t) * y;
            const double wy_analytic = w.G(t) * x + 2.0 * w.H(t, lam) * y + w.I(t, lam);
            const double h = 1e-5 * std::max(1.0, std::abs(x));
            const double wx_fd = (cand(t, x + h, y, lam) - cand(t, x - h, y, lam)) / (2.0 * h);
            const double hy = 1e-5;
            const double wy_fd = (cand(t, x, y + hy, lam) - cand(t, x, y - hy, lam)) / (2.0 * hy);
            CHECK(wx_fd == doctest::Approx(wx_analytic).epsilon(1e-8));
            CHECK(wy_fd == doctest::Approx(wy_analytic).epsilon(1e-8));
        }
    }
}

TEST_CASE("hjbi residual report on a reduced grid") {
    Fixture f;
    HjbiGrid grid;
    grid.ts = {0.0, 25.0, 50.0, 75.0, 95.0};
    grid.xs = {50.0, 100.0, 150.0};
    grid.ys = {0.5, 1.0, 2.0};
    grid.lambdas = {0.5, 1.0, 5.0};
    grid.n_spot_checks = 10;
    const ResidualReport report = hjbi_residual_report(f.p, f.curves, grid);
    CHECK(report.max_rel <= 1e-6);
    CHECK(report.sup_check_ok);
    CHECK(report.inf_check_ok);
    CHECK(report.rows.size() == 5 * 3 * 3 * 3);
}

TEST_CASE("perturbed candidate is visibly rejected (negative control)") {
    Fixture f;
    HjbiGrid grid;
    grid.ts = {0.0, 25.0, 75.0};
    grid.xs = {100.0};
    grid.ys = {1.0, 2.0};
    grid.lambdas = {1.0, 5.0, 10.0};
    grid.n_spot_checks = 0;
    const ResidualReport report = hjbi_residual_report_perturbed(f.p, f.curves, grid, 1.01);
    CHECK(report.max_rel >= 1e-3);
}

TEST_CASE("coefficient ODE residuals within tolerance") {
    Fixture f;
    const OdeResiduals r = coefficient_ode_residuals(f.p, 25);
    CHECK(r.eta <= 1e-6);
    CHECK(r.zeta <= 1e-6);
    CHECK(r.alpha <= 1e-6);
    CHECK(r.beta <= 1e-6);
}

TEST_CASE("separated PDE residuals on the (t, lambda) grid") {
    Fixture f;
    double worst_h = 0.0, worst_i = 0.0, worst_k = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double t = 0.95 * f.p.T * i / 9.0;
        for (int j = 0; j < 10; ++j) {
            const double lam = 0.1 + (10.0 - 0.1) * j / 9.0;
            worst_h = std::max(worst_h, pde_residual_H(f.p, t, lam));
            worst_i = std::max(worst_i, pde_residual_I(f.p, t, lam));
            worst_k = std::max(worst_k, std::abs(k_equation_bracket(f.p, t, lam)));
        }
    }
    CHECK(worst_h <= 1e-6);
    CHECK(worst_i <= 1e-6);
    CHECK(worst_k <= 1e-10);
}

TEST_CASE("diffusion Riccati and PDE residuals on the admissible variant") {
    const ModelParams p = oracles::diffusion_variant_params();
    const DiffusionCoefficients dc(p, 201);
    const RiccatiResiduals r = diffusion_ode_residuals(p, dc, 25);
    CHECK(r.xi <= 1e-6);
    CHECK(r.eta <= 1e-6);
    CHECK(r.zeta <= 1e-6);
    double worst_h = 0.0, worst_i = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double t = 0.95 * p.T * i / 7.0;
        for (int j = 0; j < 8; ++j) {
            const double lam = 0.1 + (10.0 - 0.1) * j / 7.0;
            worst_h = std::max(worst_h, diffusion_pde_residual_H(p, dc, t, lam));
            worst_i = std::max(worst_i, diffusion_pde_residual_I(p, dc, t, lam));
        }
    }
    CHECK(worst_h <= 1e-6);
    CHECK(worst_i <= 1e-6);
}

TEST_CASE("saddle check on a reduced run") {
    ModelParams p = oracles::section5_params();
    p.T = 5.0;
    const CoefficientCurves curves = build_curves(p, 201);
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.dt = 0.02;
    cfg.seed = 4242;
    const SaddleReport report = saddle_check(p, curves, cfg);
    CHECK(report.ok);
    REQUIRE(report.insurer_rows.size() >= 5);
    REQUIRE(report.adversary_rows.size() >= 5);
    for (const auto& row : report.insurer_rows) CHECK(row.diff <= 3.0 * row.diff_se);
    for (const auto& row : report.adversary_rows) CHECK(row.diff >= -3.0 * row.diff_se);
}

namespace {

class KillerAdversary : public Adversary {
public:
    double o(double) const override { return 0.0; }
    double p(double, double) const override { return 0.0; }
    double q(double, double) const override { return -1.0; }  // density killed at a jump
    double int_p_f1(double) const override { return 0.0; }
    double int_q_f2(double) const override { return -1.0; }
};

}  // namespace

TEST_CASE("integrability monitor") {
    ModelParams p = oracles::section5_params();
    p.T = 10.0;
    const CoefficientCurves curves = build_curves(p, 201);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.seed = 11;

    SUBCASE("optimal adversary keeps bounded integrals") {
        const auto b = make_optimal_adversary(p, curves);
        const IntegrabilityReport rep = integrability_monitor(p, curves, *b, cfg, 0);
        for (const auto& row : rep.rows) {
            CHECK_FALSE(row.truncated);
            CHECK(row.integral > 0.0);
            // o^2 alone contributes 0.0025 T; tilts are bounded, so a loose cap works.
            CHECK(row.integral < 1.0);
        }
    }

    SUBCASE("null adversary has zero tilt integral") {
        const auto b = make_no_adversary();
        const IntegrabilityReport rep = integrability_monitor(p, curves, *b, cfg, 0);
        for (const auto& row : rep.rows) {
            CHECK(row.integral == 0.0);
            CHECK_FALSE(row.truncated);
        }
    }

    SUBCASE("a density-killing tilt trips the stopping levels") {
        ModelParams pk = p;
        pk.cat.rho = 1.0;  // catastrophes near-certain within the horizon
        const CoefficientCurves curves_k = build_curves(pk, 201);
        const KillerAdversary killer;
        // Find a path whose event stream contains a catastrophe.
        IntegrabilityReport rep;
        bool found = false;
        for (std::size_t idx = 0; idx < 10 && !found; ++idx) {
            rep = integrability_monitor(pk, curves_k, killer, cfg, idx);
            found = rep.min_Y <= 1e-3;
        }
        REQUIRE(found);
        for (const auto& row : rep.rows) {
            CHECK(row.truncated);
            CHECK(row.stop_time < pk.T);
        }
    }
}
