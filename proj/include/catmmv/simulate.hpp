#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "catmmv/coefficients.hpp"
#include "catmmv/diffusion.hpp"
#include "catmmv/model.hpp"
#include "catmmv/strategies.hpp"

namespace catmmv {

struct SimConfig {
    std::size_t n_paths = 1000;
    double dt = 0.01;
    std::uint64_t seed = 1;
    std::vector<double> record_grid;  // defaults to {T}
    enum class Engine { Jump, Diffusion } engine = Engine::Jump;
    bool antithetic = false;
    bool exact_y = false;        // geometric-exact density update between events
    std::size_t n_workers = 0;   // 0 -> hardware concurrency
    bool keep_paths = false;     // retain full per-path records
};

// Raw event streams of one path: catastrophe (times, marks) and ordinary claims.
struct EventLog {
    std::vector<double> cat_times;
    std::vector<double> cat_marks;
    std::vector<double> claim_times;
    std::vector<double> claim_marks;
};

struct RecordPoint {
    double t = 0.0;
    double X = 0.0;
    double Y = 0.0;
    double lambda = 0.0;
    double pi = 0.0;
    double u = 0.0;
    double v = 0.0;
};

struct PathRecord {
    std::vector<RecordPoint> points;
    double X_T = 0.0;
    double Y_T = 0.0;
    double objective = 0.0;  // X(T) Y(T) + Y(T)^2 / (2 theta)
    bool failed = false;
};

struct PointStats {
    double t = 0.0;
    double mean_X = 0.0, se_X = 0.0, var_X = 0.0;
    double mean_Y = 0.0, se_Y = 0.0;
    double mean_lambda = 0.0, se_lambda = 0.0;
    double mean_YX = 0.0, se_YX = 0.0;
    double mean_Y2 = 0.0, se_Y2 = 0.0;
};

struct EnsembleStats {
    std::vector<PointStats> points;
    double objective_mean = 0.0;
    double objective_se = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_failed = 0;
};

struct EnsembleRun {
    EnsembleStats stats;
    std::vector<PathRecord> paths;  // populated when config.keep_paths
};

// Insurer strategy interface used by the engines.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual InsurerControls controls(double t, double x, double y, double lambda) const = 0;
};

// Adversary interface for the jump engine.  p/q compensator integrals are per
// unit intensity: the engine folds lambda(t) * int_p + rho * int_q into Y's drift.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual double o(double t) const = 0;
    virtual double p(double t, double z) const = 0;
    virtual double q(double t, double z) const = 0;
    virtual double int_p_f1(double t) const = 0;  // int p(t,z) F1(dz)
    virtual double int_q_f2(double t) const = 0;  // int q(t,z) F2(dz)
};

// Adversary for the diffusion engine (three scalar tilts; p depends on lambda).
class DiffusionAdversaryLaw {
public:
    virtual ~DiffusionAdversaryLaw() = default;
    virtual double o(double t) const = 0;
    virtual double p(double t, double lambda) const = 0;
    virtual double q(double t) const = 0;
};

// Built-in strategies and adversaries.
std::shared_ptr<Strategy> make_optimal_feedback(const ModelParams& p,
                                                const CoefficientCurves& curves);
std::shared_ptr<Strategy> make_precommitted(const ModelParams& p, const CoefficientCurves& curves,
                                            const Anchor& anchor);
std::shared_ptr<Strategy> make_constant_strategy(InsurerControls controls);
// Additive perturbation of a base strategy.
std::shared_ptr<Strategy> make_shifted_strategy(std::shared_ptr<Strategy> base,
                                                InsurerControls shift);
// Componentwise scaling of a base strategy.
std::shared_ptr<Strategy> make_scaled_strategy(std::shared_ptr<Strategy> base, double c_pi,
                                               double c_u, double c_v);

std::shared_ptr<Adversary> make_no_adversary();
std::shared_ptr<Adversary> make_optimal_adversary(const ModelParams& p,
                                                  const CoefficientCurves& curves);
// Componentwise scaling (c_o, c_p, c_q) of the optimal adversary; stays admissible
// for scalings in [0, 1] and for bounded positive scalings of p.
std::shared_ptr<Adversary> make_scaled_adversary(const ModelParams& p,
                                                 const CoefficientCurves& curves, double c_o,
                                                 double c_p, double c_q);

std::shared_ptr<Strategy> make_diffusion_feedback(const ModelParams& p,
                                                  const DiffusionCoefficients& dc);
std::shared_ptr<Strategy> make_diffusion_precommitted(const ModelParams& p,
                                                      const DiffusionCoefficients& dc,
                                                      const Anchor& anchor);
std::shared_ptr<DiffusionAdversaryLaw> make_diffusion_no_adversary();
std::shared_ptr<DiffusionAdversaryLaw> make_diffusion_optimal_adversary(
    const ModelParams& p, const DiffusionCoefficients& dc);

class CounterRng;

// Exact event sampler: catastrophe arrivals are Poisson(rho) with F2 marks;
// ordinary claims come from thinning against the decaying intensity, using each
// inter-catastrophe segment's starting value as the dominating rate.
EventLog simulate_events(const ModelParams& p, double T, CounterRng& rng);

// One jump-model path under the given strategy/adversary pair.
PathRecord simulate_path(const ModelParams& p, const CoefficientCurves& curves,
                         const Strategy& strategy, const Adversary& adversary,
                         const SimConfig& config, std::size_t path_index);

// One diffusion-model path.
PathRecord simulate_diffusion_path(const ModelParams& p, const DiffusionCoefficients& dc,
                                   const Strategy& strategy,
                                   const DiffusionAdversaryLaw& adversary,
                                   const SimConfig& config, std::size_t path_index);

// Deterministic parallel ensemble (jump engine).
EnsembleRun run_ensemble(const ModelParams& p, const CoefficientCurves& curves,
                         const Strategy& strategy, const Adversary& adversary,
                         const SimConfig& config);

// Deterministic parallel ensemble (diffusion engine).
EnsembleRun run_diffusion_ensemble(const ModelParams& p, const DiffusionCoefficients& dc,
                                   const Strategy& strategy,
                                   const DiffusionAdversaryLaw& adversary,
                                   const SimConfig& config);

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

Estimate mmv_objective_estimate(const EnsembleStats& stats);

// Importance-weighted expectation E^{Q*}[f] = E^P[Y f], with f evaluated per path
// at the given record-grid index.  Requires a run with kept paths under the
// optimal adversary.
Estimate q_star_expectation(const EnsembleRun& run,
                            const std::function<double(const PathRecord&, std::size_t)>& f,
                            std::size_t point_index);

// Direct sampler under the optimal alternative measure (tilted event laws and
// drift-corrected Brownian term); exponential claim laws only.  Used as a
// cross-check of the importance-weighted route.
struct QStarPathRecord {
    std::vector<double> t;
    std::vector<double> X;
    std::vector<double> lambda;
};
QStarPathRecord simulate_qstar_path(const ModelParams& p, const CoefficientCurves& curves,
                                    const SimConfig& config, std::size_t path_index);

}  // namespace catmmv
