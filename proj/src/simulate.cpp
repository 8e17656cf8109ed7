#include "catmmv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "catmmv/errors.hpp"
#include "catmmv/rng.hpp"
#include "catmmv/stats.hpp"

namespace catmmv {

namespace {

double decay_integral(double d, double tau) { return tau * expm1_over_x(-d * tau); }

// --- strategies -------------------------------------------------------------

class OptimalFeedbackStrategy : public Strategy {
public:
    OptimalFeedbackStrategy(const ModelParams& p, const CoefficientCurves& curves)
        : p_(p),
          curves_(curves),
          mu1_(p.mu1()),
          inv_two_theta_(0.5 / p.theta),
          drift_slope_((p.market.mu0 - p.market.r) / (p.market.sigma0 * p.market.sigma0)),
          retention_slope_(p.loadings.kappa_r * p.mu1() / p.sigma1_sq()) {}

    InsurerControls controls(double t, double /*x*/, double y, double lambda) const override {
        const double H =
            inv_two_theta_ * std::exp(curves_.eta(t) * lambda + curves_.zeta(t));
        const double invG = std::exp(-p_.market.r * (p_.T - t));
        InsurerControls c;
        c.pi = 2.0 * H * drift_slope_ * y * invG;
        c.u = 2.0 * H * retention_slope_ * y * invG;
        c.v = (2.0 * H * curves_.phi(t) * y + curves_.alpha(t)) * invG / p_.cat.k;
        return c;
    }

private:
    const ModelParams& p_;
    const CoefficientCurves& curves_;
    double mu1_, inv_two_theta_, drift_slope_, retention_slope_;
};

class PrecommittedStrategy : public Strategy {
public:
    PrecommittedStrategy(const ModelParams& p, const CoefficientCurves& curves,
                         const Anchor& anchor)
        : p_(p),
          curves_(curves),
          anchor_(anchor),
          drift_slope_((p.market.mu0 - p.market.r) / (p.market.sigma0 * p.market.sigma0)),
          retention_slope_(p.loadings.kappa_r * p.mu1() / p.sigma1_sq()) {
        // Anchor block computed once from exact closed forms.
        anchor_block_ = (anchor.y_s / p.theta) *
                            std::exp(eta(p, anchor.s) * anchor.lambda_s + zeta(p, anchor.s)) +
                        alpha(p, anchor.s) * anchor.lambda_s + beta_fn(p, anchor.s);
    }

    InsurerControls controls(double t, double x, double /*y*/, double lambda) const override {
        const double disc = std::exp(-p_.market.r * (p_.T - t));
        const double d = -x + anchor_.x_s * std::exp(p_.market.r * (t - anchor_.s)) +
                         (anchor_block_ - curves_.alpha(t) * lambda - curves_.beta(t)) * disc;
        InsurerControls c;
        c.pi = drift_slope_ * d;
        c.u = retention_slope_ * d;
        c.v = (curves_.phi(t) * d + curves_.alpha(t) * disc) / p_.cat.k;
        return c;
    }

private:
    const ModelParams& p_;
    const CoefficientCurves& curves_;
    Anchor anchor_;
    double anchor_block_ = 0.0;
    double drift_slope_, retention_slope_;
};

class ConstantStrategy : public Strategy {
public:
    explicit ConstantStrategy(InsurerControls c) : c_(c) {}
    InsurerControls controls(double, double, double, double) const override { return c_; }

private:
    InsurerControls c_;
};

class ShiftedStrategy : public Strategy {
public:
    ShiftedStrategy(std::shared_ptr<Strategy> base, InsurerControls shift)
        : base_(std::move(base)), shift_(shift) {}
    InsurerControls controls(double t, double x, double y, double lambda) const override {
        InsurerControls c = base_->controls(t, x, y, lambda);
        c.pi += shift_.pi;
        c.u += shift_.u;
        c.v += shift_.v;
        return c;
    }

private:
    std::shared_ptr<Strategy> base_;
    InsurerControls shift_;
};

class ScaledStrategy : public Strategy {
public:
    ScaledStrategy(std::shared_ptr<Strategy> base, double c_pi, double c_u, double c_v)
        : base_(std::move(base)), c_pi_(c_pi), c_u_(c_u), c_v_(c_v) {}
    InsurerControls controls(double t, double x, double y, double lambda) const override {
        InsurerControls c = base_->controls(t, x, y, lambda);
        c.pi *= c_pi_;
        c.u *= c_u_;
        c.v *= c_v_;
        return c;
    }

private:
    std::shared_ptr<Strategy> base_;
    double c_pi_, c_u_, c_v_;
};

class DiffusionFeedbackStrategy : public Strategy {
public:
    DiffusionFeedbackStrategy(const ModelParams& p, const DiffusionCoefficients& dc)
        : p_(p), dc_(dc) {}
    InsurerControls controls(double t, double /*x*/, double y, double lambda) const override {
        return diffusion_feedback_controls(p_, dc_, t, y, lambda);
    }

private:
    const ModelParams& p_;
    const DiffusionCoefficients& dc_;
};

class DiffusionPrecommittedStrategy : public Strategy {
public:
    DiffusionPrecommittedStrategy(const ModelParams& p, const DiffusionCoefficients& dc,
                                  const Anchor& anchor)
        : p_(p), dc_(dc), anchor_(anchor) {}
    InsurerControls controls(double t, double x, double /*y*/, double lambda) const override {
        return diffusion_controls(p_, dc_, anchor_, t, x, lambda);
    }

private:
    const ModelParams& p_;
    const DiffusionCoefficients& dc_;
    Anchor anchor_;
};

// --- adversaries ------------------------------------------------------------

class NoAdversary : public Adversary {
public:
    double o(double) const override { return 0.0; }
    double p(double, double) const override { return 0.0; }
    double q(double, double) const override { return 0.0; }
    double int_p_f1(double) const override { return 0.0; }
    double int_q_f2(double) const override { return 0.0; }
};

class OptimalAdversary : public Adversary {
public:
    OptimalAdversary(const ModelParams& p, const CoefficientCurves& curves)
        : curves_(curves),
          o_(-(p.market.mu0 - p.market.r) / p.market.sigma0),
          p_slope_(p.loadings.kappa_r * p.mu1() / p.sigma1_sq()),
          int_p_(p_slope_ * p.mu1()) {
        // Tabulate int q F2 = M0(eta) + phi M1(eta) - 1 on the coefficient grid.
        const auto& grid = curves.grid();
        int_q_.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double e = curves.eta_values()[i];
            const double ph = curves.phi_values()[i];
            int_q_[i] = p.claims_catastrophe.tilted_moment(0, e) +
                        ph * p.claims_catastrophe.tilted_moment(1, e) - 1.0;
        }
        t_max_ = grid.back();
        dt_ = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
    }

    double o(double) const override { return o_; }
    double p(double, double z) const override { return p_slope_ * z; }
    double q(double t, double z) const override {
        const double e = curves_.eta(t);
        return std::exp(-e * z) * (1.0 + curves_.phi(t) * z) - 1.0;
    }
    double int_p_f1(double) const override { return int_p_; }
    double int_q_f2(double t) const override {
        if (t <= 0.0) return int_q_.front();
        if (t >= t_max_) return int_q_.back();
        std::size_t i = static_cast<std::size_t>(t / dt_);
        if (i + 1 >= int_q_.size()) i = int_q_.size() - 2;
        const double w = (t - static_cast<double>(i) * dt_) / dt_;
        return int_q_[i] + w * (int_q_[i + 1] - int_q_[i]);
    }

private:
    const CoefficientCurves& curves_;
    double o_, p_slope_, int_p_;
    std::vector<double> int_q_;
    double t_max_ = 0.0, dt_ = 1.0;
};

class ScaledAdversary : public Adversary {
public:
    ScaledAdversary(std::shared_ptr<Adversary> base, double c_o, double c_p, double c_q)
        : base_(std::move(base)), c_o_(c_o), c_p_(c_p), c_q_(c_q) {}
    double o(double t) const override { return c_o_ * base_->o(t); }
    double p(double t, double z) const override { return c_p_ * base_->p(t, z); }
    double q(double t, double z) const override { return c_q_ * base_->q(t, z); }
    double int_p_f1(double t) const override { return c_p_ * base_->int_p_f1(t); }
    double int_q_f2(double t) const override { return c_q_ * base_->int_q_f2(t); }

private:
    std::shared_ptr<Adversary> base_;
    double c_o_, c_p_, c_q_;
};

class DiffusionNoAdversary : public DiffusionAdversaryLaw {
public:
    double o(double) const override { return 0.0; }
    double p(double, double) const override { return 0.0; }
    double q(double) const override { return 0.0; }
};

class DiffusionOptimalAdversary : public DiffusionAdversaryLaw {
public:
    DiffusionOptimalAdversary(const ModelParams& p, const DiffusionCoefficients& dc) {
        o_ = -(p.market.mu0 - p.market.r) / p.market.sigma0;
        p_slope_ = p.loadings.kappa_r * p.mu1() /
                   (std::sqrt(p.sigma1_sq()) * std::sqrt(p.cat.rho * p.mu2() / p.cat.delta));
        q_ = p.loadings.iota_r * p.mu2() * std::sqrt(p.cat.rho) / std::sqrt(p.sigma2_sq());
        (void)dc;
    }
    double o(double) const override { return o_; }
    double p(double, double lambda) const override { return p_slope_ * lambda; }
    double q(double) const override { return q_; }

private:
    double o_ = 0.0, p_slope_ = 0.0, q_ = 0.0;
};

// --- engine helpers ----------------------------------------------------------

struct StreamIds {
    std::uint64_t events;
    std::uint64_t brownian;
    double sign;
};

StreamIds stream_ids(const SimConfig& cfg, std::size_t path_index) {
    const std::uint64_t stream = cfg.antithetic ? path_index / 2 : path_index;
    const double sign = (cfg.antithetic && (path_index & 1U)) ? -1.0 : 1.0;
    return {stream * 4ULL, stream * 4ULL + 1ULL, sign};
}

std::vector<double> sorted_record_grid(const ModelParams& p, const SimConfig& cfg) {
    std::vector<double> grid = cfg.record_grid;
    if (grid.empty()) grid.push_back(p.T);
    std::sort(grid.begin(), grid.end());
    if (grid.front() < p.s || grid.back() > p.T) {
        throw Error("record grid must lie within [s, T]");
    }
    return grid;
}

}  // namespace

// --- factories ----------------------------------------------------------------

std::shared_ptr<Strategy> make_optimal_feedback(const ModelParams& p,
                                                const CoefficientCurves& curves) {
    return std::make_shared<OptimalFeedbackStrategy>(p, curves);
}

std::shared_ptr<Strategy> make_precommitted(const ModelParams& p, const CoefficientCurves& curves,
                                            const Anchor& anchor) {
    return std::make_shared<PrecommittedStrategy>(p, curves, anchor);
}

std::shared_ptr<Strategy> make_constant_strategy(InsurerControls controls) {
    return std::make_shared<ConstantStrategy>(controls);
}

std::shared_ptr<Strategy> make_shifted_strategy(std::shared_ptr<Strategy> base,
                                                InsurerControls shift) {
    return std::make_shared<ShiftedStrategy>(std::move(base), shift);
}

std::shared_ptr<Strategy> make_scaled_strategy(std::shared_ptr<Strategy> base, double c_pi,
                                               double c_u, double c_v) {
    return std::make_shared<ScaledStrategy>(std::move(base), c_pi, c_u, c_v);
}

std::shared_ptr<Adversary> make_no_adversary() { return std::make_shared<NoAdversary>(); }

std::shared_ptr<Adversary> make_optimal_adversary(const ModelParams& p,
                                                  const CoefficientCurves& curves) {
    return std::make_shared<OptimalAdversary>(p, curves);
}

std::shared_ptr<Adversary> make_scaled_adversary(const ModelParams& p,
                                                 const CoefficientCurves& curves, double c_o,
                                                 double c_p, double c_q) {
    return std::make_shared<ScaledAdversary>(make_optimal_adversary(p, curves), c_o, c_p, c_q);
}

std::shared_ptr<Strategy> make_diffusion_feedback(const ModelParams& p,
                                                  const DiffusionCoefficients& dc) {
    return std::make_shared<DiffusionFeedbackStrategy>(p, dc);
}

std::shared_ptr<Strategy> make_diffusion_precommitted(const ModelParams& p,
                                                      const DiffusionCoefficients& dc,
                                                      const Anchor& anchor) {
    return std::make_shared<DiffusionPrecommittedStrategy>(p, dc, anchor);
}

std::shared_ptr<DiffusionAdversaryLaw> make_diffusion_no_adversary() {
    return std::make_shared<DiffusionNoAdversary>();
}

std::shared_ptr<DiffusionAdversaryLaw> make_diffusion_optimal_adversary(
    const ModelParams& p, const DiffusionCoefficients& dc) {
    return std::make_shared<DiffusionOptimalAdversary>(p, dc);
}

// --- event simulation ----------------------------------------------------------

EventLog simulate_events(const ModelParams& p, double T, CounterRng& rng) {
    EventLog log;
    const double t0 = p.s;
    // Catastrophe arrivals: homogeneous Poisson(rho) with F2 marks.
    double t = t0;
    while (true) {
        t += rng.exponential(p.cat.rho);
        if (t >= T) break;
        log.cat_times.push_back(t);
        log.cat_marks.push_back(p.claims_catastrophe.sample(rng.uniform()));
    }
    // Ordinary claims by thinning.  Between catastrophes the intensity decays, so
    // the segment-start value dominates the whole segment.
    double seg_t = t0;
    double seg_lambda = p.lambda0;
    for (std::size_t i = 0; i <= log.cat_times.size(); ++i) {
        const double seg_end = i < log.cat_times.size() ? log.cat_times[i] : T;
        double tc = seg_t;
        if (seg_lambda > 0.0) {
            while (true) {
                tc += rng.exponential(seg_lambda);
                if (tc >= seg_end) break;
                const double accept = std::exp(-p.cat.delta * (tc - seg_t));
                if (rng.uniform() <= accept) {
                    log.claim_times.push_back(tc);
                    log.claim_marks.push_back(p.claims_ordinary.sample(rng.uniform()));
                }
            }
        }
        if (i < log.cat_times.size()) {
            seg_lambda = seg_lambda * std::exp(-p.cat.delta * (seg_end - seg_t)) +
                         log.cat_marks[i];
            seg_t = seg_end;
        }
    }
    return log;
}

// --- jump engine -----------------------------------------------------------------

PathRecord simulate_path(const ModelParams& p, const CoefficientCurves& /*curves*/,
                         const Strategy& strategy, const Adversary& adversary,
                         const SimConfig& config, std::size_t path_index) {
    const StreamIds ids = stream_ids(config, path_index);
    CounterRng ev_rng(config.seed, ids.events);
    CounterRng w_rng(config.seed, ids.brownian);

    const EventLog events = simulate_events(p, p.T, ev_rng);
    const std::vector<double> record = sorted_record_grid(p, config);

    PathRecord out;
    out.points.reserve(record.size());

    const double r = p.market.r;
    const double mu1 = p.mu1();
    const double mu2 = p.mu2();
    const double rho = p.cat.rho;
    const double k = p.cat.k;

    double t = p.s;
    double X = p.x0;
    double Y = p.y0;
    double seg_t = p.s;
    double seg_lambda = p.lambda0;
    std::size_t next_cat = 0;
    std::size_t next_claim = 0;
    std::size_t next_rec = 0;
    std::size_t step_index = 1;

    auto lambda_at = [&](double tt) { return seg_lambda * std::exp(-p.cat.delta * (tt - seg_t)); };

    auto record_state = [&](double tt) {
        const double lam = lambda_at(tt);
        const InsurerControls c = strategy.controls(tt, X, Y, lam);
        out.points.push_back({tt, X, Y, lam, c.pi, c.u, c.v});
    };

    while (next_rec < record.size() && record[next_rec] <= t) {
        record_state(record[next_rec]);
        next_rec += 1;
    }

    while (t < p.T) {
        // Next boundary: uniform step, next event, next record time, horizon.
        double t_next = std::min(p.s + static_cast<double>(step_index) * config.dt, p.T);
        double cat_t = next_cat < events.cat_times.size() ? events.cat_times[next_cat] : p.T + 1.0;
        double claim_t =
            next_claim < events.claim_times.size() ? events.claim_times[next_claim] : p.T + 1.0;
        double rec_t = next_rec < record.size() ? record[next_rec] : p.T + 1.0;
        t_next = std::min({t_next, cat_t, claim_t, rec_t});

        const double h = t_next - t;
        if (h > 0.0) {
            const double lam_t = lambda_at(t);
            const InsurerControls a = strategy.controls(t, X, Y, lam_t);
            const double o = adversary.o(t);
            const double dW = ids.sign * std::sqrt(h) * w_rng.normal();
            const double drift_x = r * X + a.pi * (p.market.mu0 - r) +
                                   ((1.0 + p.loadings.kappa_r) * a.u - p.loadings.kappa_r +
                                    p.loadings.kappa) * mu1 * lam_t +
                                   ((1.0 + p.loadings.iota_r) * a.v - p.loadings.iota_r +
                                    p.loadings.iota) * k * mu2 * rho;
            X += drift_x * h + a.pi * p.market.sigma0 * dW;
            if (config.exact_y) {
                // Exponential-martingale update with the intensity integral exact
                // within the segment and the q-compensator by Simpson.
                const double lam_int = lam_t * decay_integral(p.cat.delta, h);
                const double q_int =
                    h / 6.0 * (adversary.int_q_f2(t) + 4.0 * adversary.int_q_f2(t + 0.5 * h) +
                               adversary.int_q_f2(t_next));
                Y *= std::exp(-(adversary.int_p_f1(t) * lam_int + rho * q_int) -
                              0.5 * o * o * h + o * dW);
            } else {
                const double comp = lam_t * adversary.int_p_f1(t) + rho * adversary.int_q_f2(t);
                Y += Y * (-comp * h + o * dW);
            }
            t = t_next;
            if (t >= p.s + static_cast<double>(step_index) * config.dt) step_index += 1;
        } else {
            t = t_next;
        }

        // Events at exactly t (process before recording).
        if (next_cat < events.cat_times.size() && events.cat_times[next_cat] == t) {
            const double z = events.cat_marks[next_cat];
            const double lam_minus = lambda_at(t);
            const InsurerControls a = strategy.controls(t, X, Y, lam_minus);
            X -= k * a.v * z;
            Y *= 1.0 + adversary.q(t, z);
            seg_lambda = lam_minus + z;
            seg_t = t;
            next_cat += 1;
        } else if (next_claim < events.claim_times.size() && events.claim_times[next_claim] == t) {
            const double z = events.claim_marks[next_claim];
            const double lam_minus = lambda_at(t);
            const InsurerControls a = strategy.controls(t, X, Y, lam_minus);
            X -= a.u * z;
            Y *= 1.0 + adversary.p(t, z);
            next_claim += 1;
        }

        if (!std::isfinite(X) || !std::isfinite(Y)) {
            out.failed = true;
            return out;
        }

        while (next_rec < record.size() && record[next_rec] <= t) {
            record_state(record[next_rec]);
            next_rec += 1;
        }
    }
    while (next_rec < record.size()) {
        record_state(record[next_rec]);
        next_rec += 1;
    }

    out.X_T = X;
    out.Y_T = Y;
    out.objective = X * Y + Y * Y / (2.0 * p.theta);
    return out;
}

// --- diffusion engine ---------------------------------------------------------------

PathRecord simulate_diffusion_path(const ModelParams& p, const DiffusionCoefficients& /*dc*/,
                                   const Strategy& strategy,
                                   const DiffusionAdversaryLaw& adversary,
                                   const SimConfig& config, std::size_t path_index) {
    const StreamIds ids = stream_ids(config, path_index);
    CounterRng w_rng(config.seed, ids.brownian);
    const std::vector<double> record = sorted_record_grid(p, config);

    PathRecord out;
    out.points.reserve(record.size());

    const double r = p.market.r;
    const double sigma_u = std::sqrt(p.sigma1_sq() * p.cat.rho * p.mu2() / p.cat.delta);
    const double sigma_l = std::sqrt(p.sigma2_sq() * p.cat.rho);

    double t = p.s;
    double X = p.x0;
    double Y = p.y0;
    double lam = p.lambda0;
    std::size_t next_rec = 0;
    std::size_t step_index = 1;

    auto record_state = [&](double tt) {
        const InsurerControls c = strategy.controls(tt, X, Y, lam);
        out.points.push_back({tt, X, Y, lam, c.pi, c.u, c.v});
    };

    while (next_rec < record.size() && record[next_rec] <= t) {
        record_state(record[next_rec]);
        next_rec += 1;
    }

    while (t < p.T) {
        double t_next = std::min(p.s + static_cast<double>(step_index) * config.dt, p.T);
        const double rec_t = next_rec < record.size() ? record[next_rec] : p.T + 1.0;
        t_next = std::min(t_next, rec_t);
        const double h = t_next - t;
        if (h > 0.0) {
            const double sq = std::sqrt(h);
            const double z0 = ids.sign * w_rng.normal();
            const double z1 = ids.sign * w_rng.normal();
            const double z2 = ids.sign * w_rng.normal();
            const InsurerControls a = strategy.controls(t, X, Y, lam);
            const double o = adversary.o(t);
            const double pv = adversary.p(t, lam);
            const double qv = adversary.q(t);
            const double drift_x =
                r * X + a.pi * (p.market.mu0 - r) +
                (p.loadings.kappa_r * a.u - p.loadings.kappa_r + p.loadings.kappa) * p.mu1() *
                    lam +
                (p.loadings.iota_r * a.v - p.loadings.iota_r + p.loadings.iota) * p.cat.k *
                    p.mu2() * p.cat.rho;
            X += drift_x * h +
                 (a.pi * p.market.sigma0 * z0 - a.u * sigma_u * z1 - p.cat.k * a.v * sigma_l * z2) *
                     sq;
            if (config.exact_y) {
                Y *= std::exp((o * z0 + pv * z1 + qv * z2) * sq -
                              0.5 * (o * o + pv * pv + qv * qv) * h);
            } else {
                Y += Y * (o * z0 + pv * z1 + qv * z2) * sq;
            }
            lam += (-p.cat.delta * lam + p.cat.rho * p.mu2()) * h + sigma_l * z2 * sq;
            t = t_next;
            if (t >= p.s + static_cast<double>(step_index) * config.dt) step_index += 1;
        } else {
            t = t_next;
        }
        if (!std::isfinite(X) || !std::isfinite(Y) || !std::isfinite(lam)) {
            out.failed = true;
            return out;
        }
        while (next_rec < record.size() && record[next_rec] <= t) {
            record_state(record[next_rec]);
            next_rec += 1;
        }
    }
    while (next_rec < record.size()) {
        record_state(record[next_rec]);
        next_rec += 1;
    }
    out.X_T = X;
    out.Y_T = Y;
    out.objective = X * Y + Y * Y / (2.0 * p.theta);
    return out;
}

// --- ensembles ------------------------------------------------------------------------

namespace {

EnsembleRun reduce_ensemble(const ModelParams& /*params*/, const SimConfig& config,
                            std::vector<PathRecord>&& paths,
                            const std::vector<double>& record) {
    const std::size_t n = paths.size();
    std::size_t n_failed = 0;
    for (const auto& pr : paths) n_failed += pr.failed ? 1 : 0;
    if (static_cast<double>(n_failed) > 0.001 * static_cast<double>(n)) {
        throw Error("ensemble failed: " + std::to_string(n_failed) + " of " + std::to_string(n) +
                    " paths left the finite range");
    }

    EnsembleRun run;
    run.stats.n_paths = n;
    run.stats.n_failed = n_failed;
    const std::size_t m = n - n_failed;

    std::vector<double> buf(m);
    auto stat_of = [&](auto&& extract) {
        std::size_t j = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!paths[i].failed) buf[j++] = extract(paths[i]);
        }
        return mean_var_se(buf);
    };

    run.stats.points.resize(record.size());
    for (std::size_t pt = 0; pt < record.size(); ++pt) {
        PointStats& s = run.stats.points[pt];
        s.t = record[pt];
        auto mx = stat_of([&](const PathRecord& r) { return r.points[pt].X; });
        s.mean_X = mx.mean;
        s.se_X = mx.se;
        s.var_X = mx.var;
        auto my = stat_of([&](const PathRecord& r) { return r.points[pt].Y; });
        s.mean_Y = my.mean;
        s.se_Y = my.se;
        auto ml = stat_of([&](const PathRecord& r) { return r.points[pt].lambda; });
        s.mean_lambda = ml.mean;
        s.se_lambda = ml.se;
        auto myx = stat_of([&](const PathRecord& r) { return r.points[pt].Y * r.points[pt].X; });
        s.mean_YX = myx.mean;
        s.se_YX = myx.se;
        auto my2 = stat_of([&](const PathRecord& r) { return r.points[pt].Y * r.points[pt].Y; });
        s.mean_Y2 = my2.mean;
        s.se_Y2 = my2.se;
    }
    auto obj = stat_of([](const PathRecord& r) { return r.objective; });
    run.stats.objective_mean = obj.mean;
    run.stats.objective_se = obj.se;

    if (config.keep_paths) run.paths = std::move(paths);
    return run;
}

template <typename PathFn>
EnsembleRun run_parallel(const ModelParams& p, const SimConfig& config, PathFn&& simulate_one) {
    if (config.n_paths == 0) throw Error("n_paths must be >= 1");
    if (config.antithetic && config.n_paths % 2 != 0) {
        throw Error("antithetic sampling needs an even path count");
    }
    const std::vector<double> record = sorted_record_grid(p, config);
    std::vector<PathRecord> paths(config.n_paths);
    std::size_t workers = config.n_workers ? config.n_workers
                                           : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min<std::size_t>(workers, config.n_paths);
    if (workers <= 1) {
        for (std::size_t i = 0; i < config.n_paths; ++i) paths[i] = simulate_one(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (std::size_t i = w; i < config.n_paths; i += workers) {
                    paths[i] = simulate_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return reduce_ensemble(p, config, std::move(paths), record);
}

}  // namespace

EnsembleRun run_ensemble(const ModelParams& p, const CoefficientCurves& curves,
                         const Strategy& strategy, const Adversary& adversary,
                         const SimConfig& config) {
    return run_parallel(p, config, [&](std::size_t i) {
        return simulate_path(p, curves, strategy, adversary, config, i);
    });
}

EnsembleRun run_diffusion_ensemble(const ModelParams& p, const DiffusionCoefficients& dc,
                                   const Strategy& strategy,
                                   const DiffusionAdversaryLaw& adversary,
                                   const SimConfig& config) {
    return run_parallel(p, config, [&](std::size_t i) {
        return simulate_diffusion_path(p, dc, strategy, adversary, config, i);
    });
}

Estimate mmv_objective_estimate(const EnsembleStats& stats) {
    return {stats.objective_mean, stats.objective_se};
}

Estimate q_star_expectation(const EnsembleRun& run,
                            const std::function<double(const PathRecord&, std::size_t)>& f,
                            std::size_t point_index) {
    if (run.paths.empty()) throw Error("q_star_expectation needs a run with kept paths");
    std::vector<double> weighted;
    weighted.reserve(run.paths.size());
    for (const auto& pr : run.paths) {
        if (pr.failed) continue;
        weighted.push_back(pr.points.at(point_index).Y * f(pr, point_index));
    }
    const MeanVarSe s = mean_var_se(weighted);
    return {s.mean, s.se};
}

// --- direct sampler under the optimal alternative measure ------------------------------

QStarPathRecord simulate_qstar_path(const ModelParams& p, const CoefficientCurves& curves,
                                    const SimConfig& config, std::size_t path_index) {
    if (p.claims_ordinary.kind() != ClaimDistribution::Kind::Exponential ||
        p.claims_catastrophe.kind() != ClaimDistribution::Kind::Exponential) {
        throw Error("direct alternative-measure sampler supports exponential claim laws only");
    }
    const StreamIds ids = stream_ids(config, path_index);
    CounterRng ev_rng(config.seed, ids.events);
    CounterRng w_rng(config.seed, ids.brownian);

    const double beta2 = p.claims_catastrophe.rate();
    const double beta1 = p.claims_ordinary.rate();
    const auto& f2 = p.claims_catastrophe;

    // Tilted catastrophe intensity rho (M0(eta) + phi M1(eta)); bounded on the grid
    // for thinning.
    auto cat_rate = [&](double t) {
        const double e = curves.eta(t);
        return p.cat.rho * (f2.tilted_moment(0, e) + curves.phi(t) * f2.tilted_moment(1, e));
    };
    double cat_rate_max = 0.0;
    for (double tg : curves.grid()) cat_rate_max = std::max(cat_rate_max, cat_rate(tg));
    cat_rate_max *= 1.01;  // headroom over the grid maximum for valid thinning

    // Tilted marks: density prop. to e^{-eta z}(1 + phi z) F2(dz), an explicit
    // mixture of Exp(beta2+eta) and Gamma(2, beta2+eta).
    auto sample_cat_mark = [&](double t) {
        const double e = curves.eta(t);
        const double ph = curves.phi(t);
        const double m0 = f2.tilted_moment(0, e);
        const double m1 = f2.tilted_moment(1, e);
        const double w_exp = m0 / (m0 + ph * m1);
        const double rate = beta2 + e;
        if (ev_rng.uniform() < w_exp) return ev_rng.exponential(rate);
        return ev_rng.exponential(rate) + ev_rng.exponential(rate);
    };

    // Catastrophe events by thinning.
    std::vector<double> cat_times, cat_marks;
    {
        double t = p.s;
        while (cat_rate_max > 0.0) {
            t += ev_rng.exponential(cat_rate_max);
            if (t >= p.T) break;
            if (ev_rng.uniform() <= cat_rate(t) / cat_rate_max) {
                cat_times.push_back(t);
                cat_marks.push_back(sample_cat_mark(t));
            }
        }
    }

    // Ordinary claims: intensity lambda(t) (1 + c_p mu1); mark law mixes F1 with its
    // size-biased version.
    const double p_slope = p.loadings.kappa_r * p.mu1() / p.sigma1_sq();
    const double claim_factor = 1.0 + p_slope * p.mu1();
    auto sample_claim_mark = [&]() {
        const double w_plain = 1.0 / claim_factor;
        if (ev_rng.uniform() < w_plain) return ev_rng.exponential(beta1);
        return ev_rng.exponential(beta1) + ev_rng.exponential(beta1);
    };
    std::vector<double> claim_times, claim_marks;
    {
        double seg_t = p.s;
        double seg_lambda = p.lambda0;
        for (std::size_t i = 0; i <= cat_times.size(); ++i) {
            const double seg_end = i < cat_times.size() ? cat_times[i] : p.T;
            double tc = seg_t;
            const double dom = seg_lambda * claim_factor;
            if (dom > 0.0) {
                while (true) {
                    tc += ev_rng.exponential(dom);
                    if (tc >= seg_end) break;
                    if (ev_rng.uniform() <= std::exp(-p.cat.delta * (tc - seg_t))) {
                        claim_times.push_back(tc);
                        claim_marks.push_back(sample_claim_mark());
                    }
                }
            }
            if (i < cat_times.size()) {
                seg_lambda =
                    seg_lambda * std::exp(-p.cat.delta * (seg_end - seg_t)) + cat_marks[i];
                seg_t = seg_end;
            }
        }
    }

    // Wealth under the alternative measure: the risky-asset excess drift is absorbed
    // by the Brownian tilt; premiums and raw jumps stay as under P.
    const std::vector<double> record = sorted_record_grid(p, config);
    const Anchor anchor = anchor_of(p);
    const auto strategy = make_precommitted(p, curves, anchor);

    QStarPathRecord out;
    double t = p.s;
    double X = p.x0;
    double seg_t = p.s;
    double seg_lambda = p.lambda0;
    std::size_t next_cat = 0, next_claim = 0, next_rec = 0, step_index = 1;
    auto lambda_at = [&](double tt) { return seg_lambda * std::exp(-p.cat.delta * (tt - seg_t)); };

    while (t < p.T) {
        double t_next = std::min(p.s + static_cast<double>(step_index) * config.dt, p.T);
        const double cat_t = next_cat < cat_times.size() ? cat_times[next_cat] : p.T + 1.0;
        const double claim_t = next_claim < claim_times.size() ? claim_times[next_claim] : p.T + 1.0;
        const double rec_t = next_rec < record.size() ? record[next_rec] : p.T + 1.0;
        t_next = std::min({t_next, cat_t, claim_t, rec_t});
        const double h = t_next - t;
        if (h > 0.0) {
            const double lam_t = lambda_at(t);
            const InsurerControls a = strategy->controls(t, X, 1.0, lam_t);
            const double dW = ids.sign * std::sqrt(h) * w_rng.normal();
            const double drift_x =
                p.market.r * X +
                ((1.0 + p.loadings.kappa_r) * a.u - p.loadings.kappa_r + p.loadings.kappa) *
                    p.mu1() * lam_t +
                ((1.0 + p.loadings.iota_r) * a.v - p.loadings.iota_r + p.loadings.iota) *
                    p.cat.k * p.mu2() * p.cat.rho;
            X += drift_x * h + a.pi * p.market.sigma0 * dW;
            t = t_next;
            if (t >= p.s + static_cast<double>(step_index) * config.dt) step_index += 1;
        } else {
            t = t_next;
        }
        if (next_cat < cat_times.size() && cat_times[next_cat] == t) {
            const double z = cat_marks[next_cat];
            const double lam_minus = lambda_at(t);
            const InsurerControls a = strategy->controls(t, X, 1.0, lam_minus);
            X -= p.cat.k * a.v * z;
            seg_lambda = lam_minus + z;
            seg_t = t;
            next_cat += 1;
        } else if (next_claim < claim_times.size() && claim_times[next_claim] == t) {
            const double z = claim_marks[next_claim];
            const InsurerControls a = strategy->controls(t, X, 1.0, lambda_at(t));
            X -= a.u * z;
            next_claim += 1;
        }
        while (next_rec < record.size() && record[next_rec] <= t) {
            out.t.push_back(record[next_rec]);
            out.X.push_back(X);
            out.lambda.push_back(lambda_at(record[next_rec]));
            next_rec += 1;
        }
    }
    while (next_rec < record.size()) {
        out.t.push_back(record[next_rec]);
        out.X.push_back(X);
        out.lambda.push_back(lambda_at(record[next_rec]));
        next_rec += 1;
    }
    return out;
}

}  // namespace catmmv
