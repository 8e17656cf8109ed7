#include "catmmv/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "catmmv/config.hpp"
#include "catmmv/csv.hpp"
#include "catmmv/errors.hpp"
#include "catmmv/frontier.hpp"
#include "catmmv/simulate.hpp"
#include "catmmv/stats.hpp"
#include "catmmv/verify.hpp"

namespace catmmv {

namespace {

constexpr const char* kVersion = "0.1.0";

struct CliOptions {
    std::string config_path;
    std::string out_dir = "./out";
    std::string model = "jump";
    std::size_t grid = 2001;
    std::uint64_t seed = 1;
    std::size_t workers = 0;
    bool allow_cheap = false;

    // simulate / frontier --mc
    std::size_t paths = 10000;
    double dt = 0.01;
    std::vector<double> record;
    std::string strategy = "optimal";
    std::string adversary = "optimal";
    bool antithetic = false;
    bool exact_y = false;

    // grids
    std::vector<double> ts, xs, lambdas;

    // frontier
    bool mc = false;

    // verify
    bool saddle = false;

    // sensitivity
    std::string param;
    std::vector<double> values;
    double sens_t = 1.0;
    double sens_lambda = 1.0;
    double x_min = 0.0;
    double x_max = 200.0;
    std::size_t x_count = 21;
};

struct OutputCollector {
    std::string dir;
    std::vector<std::pair<std::string, std::string>> files;  // name, digest

    void write(const std::string& name, const std::string& content) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        atomic_write_file(path, content);
        files.emplace_back(name, fnv1a64_hex(content));
    }
};

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

SimConfig make_sim_config(const CliOptions& opt, const ModelParams& p) {
    SimConfig cfg;
    cfg.n_paths = opt.paths;
    cfg.dt = opt.dt;
    cfg.seed = opt.seed;
    cfg.record_grid = opt.record.empty() ? std::vector<double>{p.T} : opt.record;
    cfg.engine = opt.model == "diffusion" ? SimConfig::Engine::Diffusion : SimConfig::Engine::Jump;
    cfg.antithetic = opt.antithetic;
    cfg.exact_y = opt.exact_y;
    cfg.n_workers = opt.workers;
    return cfg;
}

// Applies a dotted config-schema path (or a claim-rate alias) to params.
void apply_parameter(ModelParams& p, const std::string& name, double value) {
    static const std::map<std::string, int> ids = {
        {"market.mu0", 0},          {"market.sigma0", 1},
        {"market.r", 2},            {"loadings.kappa", 3},
        {"loadings.kappa_r", 4},    {"loadings.iota", 5},
        {"loadings.iota_r", 6},     {"catastrophe.rho", 7},
        {"catastrophe.delta", 8},   {"catastrophe.k", 9},
        {"claims.ordinary.rate", 10}, {"claims.catastrophe.rate", 11},
        {"theta", 12},              {"initial.x0", 13},
        {"initial.lambda0", 14},    {"initial.y0", 15},
        {"rho", 7},                 {"delta", 8},
        {"k", 9},                   {"beta1", 10},
        {"beta2", 11}};
    auto it = ids.find(name);
    if (it == ids.end()) {
        throw ValidationError(name, "unknown sensitivity parameter");
    }
    switch (it->second) {
        case 0: p.market.mu0 = value; break;
        case 1: p.market.sigma0 = value; break;
        case 2: p.market.r = value; break;
        case 3: p.loadings.kappa = value; break;
        case 4: p.loadings.kappa_r = value; break;
        case 5: p.loadings.iota = value; break;
        case 6: p.loadings.iota_r = value; break;
        case 7: p.cat.rho = value; break;
        case 8: p.cat.delta = value; break;
        case 9: p.cat.k = value; break;
        case 10: p.claims_ordinary = ClaimDistribution::exponential(value); break;
        case 11: p.claims_catastrophe = ClaimDistribution::exponential(value); break;
        case 12: p.theta = value; break;
        case 13: p.x0 = value; break;
        case 14: p.lambda0 = value; break;
        case 15: p.y0 = value; break;
        default: break;
    }
}

int cmd_coeffs(const CliOptions& opt, const ModelParams& p, OutputCollector& outputs,
               std::ostream& out) {
    if (opt.model == "diffusion") {
        const DiffusionCoefficients dc(p, opt.grid);
        CsvBuilder csv({"t", "eta", "zeta", "alpha", "beta", "phi", "xi"});
        for (double t : dc.grid()) {
            // phi column: catastrophe-retention slope at the configured lambda0.
            const double slope = p.loadings.iota_r * p.mu2() / p.sigma2_sq() +
                                 2.0 * dc.xi(t) * p.lambda0 + dc.eta(t);
            csv.add_row({t, dc.eta(t), dc.zeta(t), dc.alpha(t), dc.beta(t), slope, dc.xi(t)});
        }
        outputs.write("coeffs.csv", csv.str());
    } else {
        const CoefficientCurves curves(p, opt.grid);
        CsvBuilder csv({"t", "eta", "zeta", "alpha", "beta", "phi"});
        const auto& g = curves.grid();
        for (std::size_t i = 0; i < g.size(); ++i) {
            csv.add_row({g[i], curves.eta_values()[i], curves.zeta_values()[i],
                         curves.alpha_values()[i], curves.beta_values()[i],
                         curves.phi_values()[i]});
        }
        outputs.write("coeffs.csv", csv.str());
    }
    out << "wrote coeffs.csv (" << opt.grid << " rows)\n";
    return 0;
}

int cmd_value(const CliOptions& opt, const ModelParams& p, OutputCollector& outputs,
              std::ostream& out) {
    const std::vector<double> ts = opt.ts.empty() ? std::vector<double>{p.s} : opt.ts;
    const std::vector<double> xs = opt.xs.empty() ? std::vector<double>{p.x0} : opt.xs;
    const std::vector<double> lambdas =
        opt.lambdas.empty() ? std::vector<double>{p.lambda0} : opt.lambdas;
    const Anchor anchor = anchor_of(p);
    CsvBuilder csv({"t", "x", "lambda", "W"});
    double v_theta = 0.0;
    if (opt.model == "diffusion") {
        const DiffusionCoefficients dc(p, opt.grid);
        v_theta = diffusion_value(p, dc, anchor, anchor.s, p.x0, p.lambda0);
        for (double t : ts)
            for (double lam : lambdas)
                for (double x : xs) csv.add_row({t, x, lam, diffusion_value(p, dc, anchor, t, x, lam)});
    } else {
        const CoefficientCurves curves(p, opt.grid);
        v_theta = mmv_value(p, curves);
        for (double t : ts)
            for (double lam : lambdas)
                for (double x : xs)
                    csv.add_row({t, x, lam, value_function(p, curves, anchor, t, x, lam)});
    }
    outputs.write("value.csv", csv.str());
    out << "V_theta = " << format_double(v_theta) << "\n";
    return 0;
}

int cmd_policy(const CliOptions& opt, const ModelParams& p, OutputCollector& outputs,
               std::ostream& out) {
    const std::vector<double> ts = opt.ts.empty() ? std::vector<double>{p.s} : opt.ts;
    const std::vector<double> xs =
        opt.xs.empty() ? linspace(0.0, 2.0 * std::max(1.0, p.x0), 21) : opt.xs;
    const std::vector<double> lambdas =
        opt.lambdas.empty() ? std::vector<double>{p.lambda0} : opt.lambdas;
    const Anchor anchor = anchor_of(p);
    CsvBuilder csv({"t", "x", "lambda", "pi", "u", "v"});
    if (opt.model == "diffusion") {
        const DiffusionCoefficients dc(p, opt.grid);
        for (double t : ts)
            for (double lam : lambdas)
                for (double x : xs) {
                    const InsurerControls c = diffusion_controls(p, dc, anchor, t, x, lam);
                    csv.add_row({t, x, lam, c.pi, c.u, c.v});
                }
    } else {
        const CoefficientCurves curves(p, opt.grid);
        for (double t : ts)
            for (double lam : lambdas)
                for (double x : xs) {
                    const InsurerControls c = precommitted_controls(p, curves, anchor, t, x, lam);
                    csv.add_row({t, x, lam, c.pi, c.u, c.v});
                }
    }
    outputs.write("policy.csv", csv.str());
    out << "wrote policy.csv\n";
    return 0;
}

int cmd_simulate(const CliOptions& opt, const ModelParams& p, OutputCollector& outputs,
                 std::ostream& out) {
    SimConfig cfg = make_sim_config(opt, p);
    const Anchor anchor = anchor_of(p);
    EnsembleRun run;
    if (opt.model == "diffusion") {
        const DiffusionCoefficients dc(p, opt.grid);
        const auto strategy = opt.strategy == "precommitted"
                                  ? make_diffusion_precommitted(p, dc, anchor)
                                  : make_diffusion_feedback(p, dc);
        const auto adversary = opt.adversary == "none" ? make_diffusion_no_adversary()
                                                       : make_diffusion_optimal_adversary(p, dc);
        run = run_diffusion_ensemble(p, dc, *strategy, *adversary, cfg);
    } else {
        const CoefficientCurves curves(p, opt.grid);
        const auto strategy = opt.strategy == "precommitted"
                                  ? make_precommitted(p, curves, anchor)
                                  : make_optimal_feedback(p, curves);
        const auto adversary =
            opt.adversary == "none" ? make_no_adversary() : make_optimal_adversary(p, curves);
        run = run_ensemble(p, curves, *strategy, *adversary, cfg);
    }

    CsvBuilder csv({"t", "mean_X", "se_X", "var_X", "mean_Y", "se_Y", "mean_lambda", "se_lambda",
                    "mean_YX", "se_YX", "mean_Y2", "se_Y2"});
    for (const auto& s : run.stats.points) {
        csv.add_row({s.t, s.mean_X, s.se_X, s.var_X, s.mean_Y, s.se_Y, s.mean_lambda,
                     s.se_lambda, s.mean_YX, s.se_YX, s.mean_Y2, s.se_Y2});
    }
    outputs.write("ensemble.csv", csv.str());

    CsvBuilder obj({"estimate", "se", "n_paths"});
    obj.add_row({run.stats.objective_mean, run.stats.objective_se,
                 static_cast<double>(run.stats.n_paths)});
    outputs.write("objective.csv", obj.str());
    out << "objective estimate " << format_double(run.stats.objective_mean) << " (se "
        << format_double(run.stats.objective_se) << ", " << run.stats.n_paths << " paths)\n";
    return 0;
}

int cmd_frontier(const CliOptions& opt, const ModelParams& p, OutputCollector& outputs,
                 std::ostream& out) {
    if (opt.model == "diffusion") {
        throw ValidationError("frontier", "closed-form frontier is jump-model only");
    }
    const CoefficientCurves curves(p, opt.grid);
    const Anchor anchor = anchor_of(p);
    std::vector<double> ts = opt.ts;
    if (ts.empty()) ts = linspace(p.T / 4.0, p.T, 4);

    std::vector<std::string> header = {"t", "mean_P", "mean_Q", "var_P", "C1", "C2", "C3"};
    if (opt.mc) {
        for (const char* extra : {"mc_mean_P", "mc_var_P", "mc_se_mean", "mc_se_var"}) {
            header.push_back(extra);
        }
    }
    CsvBuilder csv(header);

    EnsembleRun run;
    if (opt.mc) {
        SimConfig cfg = make_sim_config(opt, p);
        cfg.record_grid = ts;
        cfg.keep_paths = true;
        const auto strategy = make_optimal_feedback(p, curves);
        const auto adversary = make_optimal_adversary(p, curves);
        run = run_ensemble(p, curves, *strategy, *adversary, cfg);
    }

    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts[i];
        const FrontierPoint fp = frontier_point(p, curves, anchor, t);
        const FrontierConstants fc = frontier_constants(p, curves, anchor.s, t, anchor.lambda_s);
        std::vector<double> row = {t, fp.mean_P, fp.mean_Q, fp.var_P, fc.C1, fc.C2, fc.C3};
        if (opt.mc) {
            const PointStats& s = run.stats.points[i];
            std::vector<double> xs;
            xs.reserve(run.paths.size());
            for (const auto& pr : run.paths) {
                if (!pr.failed) xs.push_back(pr.points[i].X);
            }
            row.push_back(s.mean_X);
            row.push_back(s.var_X);
            row.push_back(s.se_X);
            row.push_back(variance_se(xs));
        }
        csv.add_row(row);
    }
    outputs.write("frontier.csv", csv.str());
    out << "wrote frontier.csv (" << ts.size() << " rows)\n";
    return 0;
}

int cmd_verify(const CliOptions& opt, const ModelParams& p, OutputCollector& outputs,
               std::ostream& out) {
    bool all_ok = true;
    auto line = [&](const std::string& name, bool ok, double value) {
        all_ok = all_ok && ok;
        out << (ok ? "[PASS] " : "[FAIL] ") << name << " = " << format_double(value) << "\n";
    };

    if (opt.model == "diffusion") {
        const DiffusionCoefficients dc(p, opt.grid);
        const RiccatiResiduals ode = diffusion_ode_residuals(p, dc, 25);
        line("riccati residual xi", ode.xi <= 1e-6, ode.xi);
        line("riccati residual eta", ode.eta <= 1e-6, ode.eta);
        line("ode residual zeta", ode.zeta <= 1e-6, ode.zeta);
        double worst_h = 0.0, worst_i = 0.0;
        for (double t : linspace(0.0, 0.95 * p.T, 10)) {
            for (double lam : linspace(0.1, 10.0, 10)) {
                worst_h = std::max(worst_h, diffusion_pde_residual_H(p, dc, t, lam));
                worst_i = std::max(worst_i, diffusion_pde_residual_I(p, dc, t, lam));
            }
        }
        line("pde residual H", worst_h <= 1e-6, worst_h);
        line("pde residual I", worst_i <= 1e-6, worst_i);
        return all_ok ? 0 : 2;
    }

    const CoefficientCurves curves(p, opt.grid);
    const OdeResiduals ode = coefficient_ode_residuals(p, 25);
    line("ode residual eta", ode.eta <= 1e-6, ode.eta);
    line("ode residual zeta", ode.zeta <= 1e-6, ode.zeta);
    line("ode residual alpha", ode.alpha <= 1e-6, ode.alpha);
    line("ode residual beta", ode.beta <= 1e-6, ode.beta);

    double worst_h = 0.0, worst_i = 0.0, worst_k = 0.0;
    for (double t : linspace(0.0, 0.95 * p.T, 10)) {
        for (double lam : linspace(0.1, 10.0, 10)) {
            worst_h = std::max(worst_h, pde_residual_H(p, t, lam));
            worst_i = std::max(worst_i, pde_residual_I(p, t, lam));
            worst_k = std::max(worst_k, std::abs(k_equation_bracket(p, t, lam)));
        }
    }
    line("pde residual H", worst_h <= 1e-6, worst_h);
    line("pde residual I", worst_i <= 1e-6, worst_i);
    line("k-equation bracket", worst_k <= 1e-10, worst_k);

    const HjbiGrid grid = standard_hjbi_grid(p);
    const ResidualReport report = hjbi_residual_report(p, curves, grid);
    line("hjbi max relative residual", report.max_rel <= 1e-6, report.max_rel);
    line("hjbi sup-side spot checks", report.sup_check_ok, report.sup_check_ok ? 1.0 : 0.0);
    line("hjbi inf-side spot checks", report.inf_check_ok, report.inf_check_ok ? 1.0 : 0.0);

    CsvBuilder csv({"t", "x", "y", "lambda", "residual", "scale"});
    for (const auto& row : report.rows) {
        csv.add_row({row.t, row.x, row.y, row.lambda, row.residual, row.scale});
    }
    outputs.write("residuals.csv", csv.str());

    if (opt.saddle) {
        SimConfig cfg = make_sim_config(opt, p);
        const SaddleReport saddle = saddle_check(p, curves, cfg);
        out << "saddle objective " << format_double(saddle.optimal_objective) << " (se "
            << format_double(saddle.optimal_se) << ")\n";
        for (const auto& row : saddle.insurer_rows) {
            line("saddle insurer " + row.label + " (diff <= 3 se)", row.ok, row.diff);
        }
        for (const auto& row : saddle.adversary_rows) {
            line("saddle adversary " + row.label + " (diff >= -3 se)", row.ok, row.diff);
        }
    }
    return all_ok ? 0 : 2;
}

int cmd_sensitivity(const CliOptions& opt, const ModelParams& base, OutputCollector& outputs,
                    std::ostream& out) {
    if (opt.param.empty()) throw ValidationError("--param", "required");
    if (opt.values.empty()) throw ValidationError("--values", "required");
    const std::vector<double> xs = linspace(opt.x_min, opt.x_max, opt.x_count);
    CsvBuilder csv({"param_value", "x", "u", "v"});
    for (double value : opt.values) {
        ModelParams p = base;
        apply_parameter(p, opt.param, value);
        p = validate(p);
        const CoefficientCurves curves(p, opt.grid);
        const Anchor anchor = anchor_of(p);
        for (double x : xs) {
            const InsurerControls c =
                precommitted_controls(p, curves, anchor, opt.sens_t, x, opt.sens_lambda);
            csv.add_row({value, x, c.u, c.v});
        }
    }
    std::string stem = opt.param;
    for (char& ch : stem) {
        if (ch == '.') ch = '_';
    }
    const std::string name = "sensitivity_" + stem + ".csv";
    outputs.write(name, csv.str());
    out << "wrote " << name << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"monotone mean-variance catastrophe reinsurance toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    CliOptions opt;

    app.add_option("--config", opt.config_path, "JSON parameter file")->required();
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--model", opt.model, "jump|diffusion")
        ->check(CLI::IsMember({"jump", "diffusion"}));
    app.add_option("--grid", opt.grid, "coefficient tabulation density");
    app.add_option("--seed", opt.seed, "master seed");
    app.add_option("--workers", opt.workers, "worker threads (0 = hardware)");
    app.add_flag("--allow-cheap-reinsurance", opt.allow_cheap,
                 "disable the kappa_r >= kappa, iota_r >= iota check");

    auto* coeffs = app.add_subcommand("coeffs", "tabulate coefficient curves");
    auto* value = app.add_subcommand("value", "value function and V_theta");
    auto* policy = app.add_subcommand("policy", "optimal controls on a grid");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo ensemble");
    auto* frontier = app.add_subcommand("frontier", "efficient frontier");
    auto* verify = app.add_subcommand("verify", "residual and saddle checks");
    auto* sensitivity = app.add_subcommand("sensitivity", "strategy sensitivity sweep");

    for (auto* cmd : {value, policy, frontier}) {
        cmd->add_option("--t", opt.ts, "time points")->delimiter(',');
    }
    for (auto* cmd : {value, policy}) {
        cmd->add_option("--x", opt.xs, "wealth points")->delimiter(',');
        cmd->add_option("--lambda", opt.lambdas, "intensity points")->delimiter(',');
    }
    for (auto* cmd : {simulate, frontier}) {
        cmd->add_option("--paths", opt.paths, "number of paths");
        cmd->add_option("--dt", opt.dt, "Euler step");
        cmd->add_option("--record", opt.record, "record times")->delimiter(',');
        cmd->add_flag("--antithetic", opt.antithetic, "antithetic pairs");
        cmd->add_flag("--exact-y", opt.exact_y, "geometric-exact density update");
    }
    simulate->add_option("--strategy", opt.strategy, "optimal|precommitted")
        ->check(CLI::IsMember({"optimal", "precommitted"}));
    simulate->add_option("--adversary", opt.adversary, "optimal|none")
        ->check(CLI::IsMember({"optimal", "none"}));
    frontier->add_flag("--mc", opt.mc, "append Monte Carlo columns");
    verify->add_flag("--saddle", opt.saddle, "also run the Monte Carlo saddle check");
    verify->add_option("--paths", opt.paths, "saddle-check paths");
    verify->add_option("--dt", opt.dt, "saddle-check Euler step");
    sensitivity->add_option("--param", opt.param, "config parameter name");
    sensitivity->add_option("--values", opt.values, "parameter values")->delimiter(',');
    sensitivity->add_option("--t", opt.sens_t, "evaluation time");
    sensitivity->add_option("--lambda", opt.sens_lambda, "evaluation intensity");
    sensitivity->add_option("--x-min", opt.x_min, "wealth grid start");
    sensitivity->add_option("--x-max", opt.x_max, "wealth grid end");
    sensitivity->add_option("--x-count", opt.x_count, "wealth grid size");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }

    const auto t_start = std::chrono::steady_clock::now();
    try {
        if (const char* env_seed = std::getenv("CATMMV_SEED")) {
            opt.seed = std::stoull(env_seed);
        }
        ModelParams params = load_params_file(opt.config_path);
        params.allow_cheap_reinsurance = opt.allow_cheap;
        params = validate(params);

        OutputCollector outputs;
        outputs.dir = opt.out_dir;

        int rc = 1;
        std::string sub;
        if (coeffs->parsed()) {
            sub = "coeffs";
            rc = cmd_coeffs(opt, params, outputs, out);
        } else if (value->parsed()) {
            sub = "value";
            rc = cmd_value(opt, params, outputs, out);
        } else if (policy->parsed()) {
            sub = "policy";
            rc = cmd_policy(opt, params, outputs, out);
        } else if (simulate->parsed()) {
            sub = "simulate";
            rc = cmd_simulate(opt, params, outputs, out);
        } else if (frontier->parsed()) {
            sub = "frontier";
            rc = cmd_frontier(opt, params, outputs, out);
        } else if (verify->parsed()) {
            sub = "verify";
            rc = cmd_verify(opt, params, outputs, out);
        } else if (sensitivity->parsed()) {
            sub = "sensitivity";
            rc = cmd_sensitivity(opt, params, outputs, out);
        }

        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                          t_start)
                                .count();
        nlohmann::json manifest;
        manifest["version"] = kVersion;
        manifest["subcommand"] = sub;
        manifest["seed"] = opt.seed;
        manifest["model"] = opt.model;
        manifest["wall_clock_seconds"] = wall;
        manifest["config"] = params_to_json(params);
        manifest["outputs"] = nlohmann::json::array();
        for (const auto& [name, digest] : outputs.files) {
            manifest["outputs"].push_back({{"file", name}, {"fnv1a64", digest}});
        }
        atomic_write_file((std::filesystem::path(opt.out_dir) / "manifest.json").string(),
                          manifest.dump(2) + "\n");
        return rc;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const QuadratureFailure& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConditionViolated& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateWindow& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace catmmv
