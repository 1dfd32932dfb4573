// Command-line front end: classify | survival | rates | ode-check |
// phase-diagram | simulate | rerun. Every run that writes an output file also
// writes a manifest (config echo + options + seed) next to it; `rerun
// --manifest` reproduces the output byte for byte.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csbp/cellmodel.hpp"
#include "csbp/config.hpp"
#include "csbp/env.hpp"
#include "csbp/montecarlo.hpp"
#include "csbp/parallel.hpp"
#include "csbp/quenched_ode.hpp"
#include "csbp/quenched_stable.hpp"
#include "csbp/regimes.hpp"

using json = nlohmann::json;
using namespace csbp;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string g6(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

std::vector<double> parse_grid(const std::string& s) {
    double a, b, step;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0.0)
        throw std::runtime_error("grid must be A:B:STEP with STEP > 0, got '" + s + "'");
    std::vector<double> g;
    for (double x = a; x <= b + 1e-9 * step; x += step) g.push_back(x);
    if (g.empty()) throw std::runtime_error("grid '" + s + "' is empty");
    return g;
}

Method parse_method(const std::string& s) {
    if (s == "plain") return Method::plain();
    if (s == "feller") return Method::feller_exact();
    if (s.rfind("esscher:", 0) == 0) {
        const std::string arg = s.substr(8);
        if (arg == "auto") return Method::esscher_auto();
        return Method::esscher(std::stod(arg));
    }
    throw std::runtime_error("unknown method '" + s + "' (plain | esscher:LAMBDA | esscher:auto)");
}

void write_manifest(const std::string& out, const std::string& command, const json& options) {
    json m;
    m["version"] = kVersion;
    m["command"] = command;
    m["options"] = options;
    std::ofstream f(out + ".manifest.json");
    f << m.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// command runners; each takes the full option document so `rerun` can replay

int run_classify(const json& opt) {
    const ModelConfig cfg = parse_model(opt.at("config"));
    const EnvironmentSpec env = cfg.environment_for_mechanism();
    const RegimeReport rep = classify(env, cfg.growth(), cfg.beta());
    std::printf("%s rate=%s kappa=%s\n", to_string(rep.label), g6(rep.exp_rate).c_str(),
                g6(rep.poly_exponent).c_str());
    std::printf("label,phi_K_prime0,phi_K_prime1,tau,exp_rate,poly_exponent\n");
    std::printf("%s,%s,%s,%s,%s,%s\n", to_string(rep.label), g17(rep.phi_K_prime0).c_str(),
                rep.phi_K_prime1 ? g17(*rep.phi_K_prime1).c_str() : "",
                rep.tau ? g17(*rep.tau).c_str() : "", g17(rep.exp_rate).c_str(),
                g17(rep.poly_exponent).c_str());
    if (cfg.cell) {
        const InfectedRegimeReport ir = infected_regime(*cfg.cell);
        std::printf("infected cells: %s\n", ir.form.c_str());
    }
    return 0;
}

int run_survival(const json& opt, const std::string& out) {
    const ModelConfig cfg = parse_model(opt.at("config"));
    const double t = opt.at("t").get<double>();
    const std::size_t n = opt.at("n").get<std::size_t>();
    const std::uint64_t seed = opt.at("seed").get<std::uint64_t>();
    const int workers = opt.at("workers").get<int>();
    const EnvironmentSpec env = cfg.environment_for_mechanism();

    std::vector<std::string> rows(n);
    if (cfg.stable) {
        const StableMechanism mech = *cfg.stable;
        const double x0 = cfg.x0;
        parallel_for(n, workers, [&](std::size_t i) {
            RngStream rng = RngStream::substream(seed, i);
            const JumpPath path = env.sample_path(t, rng);
            const QuenchedStableResult r = quenched_survival_detail(mech, x0, t, path);
            rows[i] = std::to_string(i) + "," + g17(t) + "," + g17(r.functional_J) + "," +
                      g17(r.survival_prob);
        });
    } else if (cfg.general) {
        // no closed form: report the absorption-probability bracket
        const GeneralMechanism mech = *cfg.general;
        const double x0 = cfg.x0;
        const std::vector<double> ladder = {1, 10, 100, 1e3, 1e4, 1e5, 1e6};
        parallel_for(n, workers, [&](std::size_t i) {
            RngStream rng = RngStream::substream(seed, i);
            const JumpPath path = env.sample_path(t, rng);
            const SurvivalBracket b = survival_general(mech, x0, t, path, ladder);
            rows[i] = std::to_string(i) + "," + g17(t) + "," + g17(b.lower) + "," + g17(b.upper);
        });
    } else {
        throw std::runtime_error("survival: config has no mechanism");
    }

    std::ofstream f(out);
    f << (cfg.stable ? "path_id,t,J,survival\n" : "path_id,t,absorption_lower,absorption_upper\n");
    for (const auto& r : rows) f << r << "\n";
    return 0;
}

int run_rates(const json& opt, const std::string& out) {
    const ModelConfig cfg = parse_model(opt.at("config"));
    if (!cfg.stable) throw std::runtime_error("rates: needs a stable mechanism");
    const StableMechanism mech = *cfg.stable;
    const EnvironmentSpec env = cfg.environment_for_mechanism();
    const std::vector<double> grid = parse_grid(opt.at("t_grid").get<std::string>());
    const std::size_t n = opt.at("n").get<std::size_t>();
    const std::uint64_t seed = opt.at("seed").get<std::uint64_t>();
    const int workers = opt.at("workers").get<int>();
    const Method method = parse_method(opt.at("method").get<std::string>());
    const bool do_fit = opt.value("fit", false);

    std::ofstream f(out);
    f << "t,estimate,stderr,method\n";
    std::vector<RatePoint> series;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        // fresh substream block per grid point so estimates are independent
        const std::uint64_t block_seed = seed + 0x100000ULL * (k + 1);
        const SurvivalEstimate est =
            annealed_survival(mech, cfg.x0, env, grid[k], n, method, block_seed, workers);
        std::string mname = est.method == EstimatorKind::plain
                                ? "plain"
                                : (est.method == EstimatorKind::esscher
                                       ? "esscher:" + g17(est.tilt)
                                       : "feller");
        f << g17(est.t) << "," << g17(est.value) << "," << g17(est.stderr_) << "," << mname
          << "\n";
        series.push_back({est.t, est.value, est.stderr_});
    }
    if (do_fit) {
        const RateFit fit = fit_rate(series);
        const RegimeReport rep = classify(env, mech.g, mech.beta);
        f << "# fit rho_hat=" << g17(fit.rho_hat) << " kappa_hat=" << g17(fit.kappa_hat)
          << " r2=" << g17(fit.r2) << "\n";
        f << "# predicted label=" << to_string(rep.label) << " rho=" << g17(rep.exp_rate)
          << " kappa=" << g17(rep.poly_exponent) << "\n";
    }
    return 0;
}

int run_ode_check(const json& opt, const std::string& out) {
    const ModelConfig cfg = parse_model(opt.at("config"));
    if (!cfg.stable) throw std::runtime_error("ode-check: needs a stable mechanism");
    const StableMechanism mech = *cfg.stable;
    const EnvironmentSpec env = cfg.environment_for_mechanism();
    const double t = opt.at("t").get<double>();
    const std::size_t n = opt.at("n").get<std::size_t>();
    const std::uint64_t seed = opt.at("seed").get<std::uint64_t>();
    const double tol = opt.at("tol").get<double>();
    const std::vector<double> lambdas = opt.at("lambdas").get<std::vector<double>>();

    std::ofstream f(out);
    f << "path_id,lambda,v0_ode,v0_closed,rel_err\n";
    double max_rel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = RngStream::substream(seed, i);
        const JumpPath path = env.sample_path(t, rng);
        for (double lam : lambdas) {
            const double v_ode = solve_backward(mech, lam, t, path, tol).v0;
            const double J = mech.c_plus * mech.beta * path.exp_functional(mech.beta, t);
            const double v_closed = std::pow(J + std::pow(lam, -mech.beta), -1.0 / mech.beta);
            const double rel = std::abs(v_ode - v_closed) / v_closed;
            max_rel = std::max(max_rel, rel);
            f << i << "," << g17(lam) << "," << g17(v_ode) << "," << g17(v_closed) << ","
              << g17(rel) << "\n";
        }
    }
    std::printf("max_rel_err=%s\n", g17(max_rel).c_str());
    return 0;
}

int run_phase_diagram(const json& opt, const std::string& out) {
    const std::vector<double> thetas = parse_grid(opt.at("theta").get<std::string>());
    const std::vector<double> grs = parse_grid(opt.at("gr").get<std::string>());
    const auto cells = phase_diagram(thetas, grs);
    std::ofstream f(out);
    f << "theta,g_over_r,label,boundary_supercritical,boundary_strong_weak\n";
    for (const PhaseCell& c : cells)
        f << g17(c.theta) << "," << g17(c.g_over_r) << "," << to_string(c.label) << ","
          << g17(c.boundary_supercritical) << "," << g17(c.boundary_strong_weak) << "\n";
    return 0;
}

int run_simulate(const json& opt, const std::string& out) {
    const ModelConfig cfg = parse_model(opt.at("config"));
    const double horizon = opt.at("horizon").get<double>();
    const std::size_t n = opt.at("n").get<std::size_t>();
    const std::uint64_t seed = opt.at("seed").get<std::uint64_t>();
    const EnvironmentSpec env =
        cfg.has_mechanism() ? cfg.environment_for_mechanism() : *cfg.environment;
    std::ofstream f(out);
    f << "path_id,time,log_multiplier\n";
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = RngStream::substream(seed, i);
        const JumpPath path = env.sample_path(horizon, rng);
        for (const Jump& j : path.jumps())
            f << i << "," << g17(j.time) << "," << g17(j.log_m) << "\n";
    }
    return 0;
}

int dispatch(const std::string& command, const json& options, const std::string& out) {
    if (command == "classify") return run_classify(options);
    if (command == "survival") return run_survival(options, out);
    if (command == "rates") return run_rates(options, out);
    if (command == "ode-check") return run_ode_check(options, out);
    if (command == "phase-diagram") return run_phase_diagram(options, out);
    if (command == "simulate") return run_simulate(options, out);
    throw std::runtime_error("unknown command in manifest: " + command);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous-state branching with multiplicative catastrophes"};
    app.require_subcommand(1);

    std::string config_path, out_path = "out.csv", t_grid = "10:60:10", method = "plain";
    std::string theta_grid = "0.05:0.45:0.05", gr_grid = "0:2:0.05", manifest_path;
    std::uint64_t seed = 1;
    std::size_t n = 10000;
    double t = 10.0, horizon = 10.0, tol = 1e-9;
    int workers = default_workers();
    bool quenched = false, fit = false;
    std::vector<double> lambdas = {0.1, 1.0, 10.0};

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "model file")->required();
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--workers", workers, "worker threads");
        cmd->add_option("--out", out_path, "output CSV path");
    };

    CLI::App* c_classify = app.add_subcommand("classify", "regime classification report");
    c_classify->add_option("--config", config_path)->required();

    CLI::App* c_surv = app.add_subcommand("survival", "per-path survival probabilities");
    add_common(c_surv, true);
    c_surv->add_flag("--quenched", quenched, "per-path (conditional) output");
    c_surv->add_option("--t", t, "time horizon");
    c_surv->add_option("--n", n, "number of paths");

    CLI::App* c_rates = app.add_subcommand("rates", "annealed survival estimates over a time grid");
    add_common(c_rates, true);
    c_rates->add_option("--t-grid", t_grid, "A:B:STEP");
    c_rates->add_option("--n", n, "samples per grid point");
    c_rates->add_option("--method", method, "plain | esscher:LAMBDA | esscher:auto");
    c_rates->add_flag("--fit", fit, "append rate fit and prediction rows");

    CLI::App* c_ode = app.add_subcommand("ode-check", "backward solver vs closed form");
    add_common(c_ode, true);
    c_ode->add_option("--t", t, "time horizon");
    c_ode->add_option("--n", n, "number of paths");
    c_ode->add_option("--tol", tol, "solver tolerance");
    c_ode->add_option("--lambda", lambdas, "lambda values");

    CLI::App* c_phase = app.add_subcommand("phase-diagram", "cell model regime map");
    c_phase->add_option("--theta", theta_grid, "A:B:STEP in (0, 0.5)");
    c_phase->add_option("--gr", gr_grid, "g/r grid A:B:STEP");
    c_phase->add_option("--out", out_path, "output CSV path");

    CLI::App* c_sim = app.add_subcommand("simulate", "export sampled environment paths");
    add_common(c_sim, true);
    c_sim->add_option("--horizon", horizon, "path horizon");
    c_sim->add_option("--n", n, "number of paths");

    CLI::App* c_rerun = app.add_subcommand("rerun", "replay a run from its manifest");
    c_rerun->add_option("--manifest", manifest_path, "manifest file")->required();
    c_rerun->add_option("--out", out_path, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_rerun->parsed()) {
            std::ifstream mf(manifest_path);
            if (!mf) throw std::runtime_error("cannot open manifest " + manifest_path);
            json m;
            mf >> m;
            const std::string command = m.at("command").get<std::string>();
            const int rc = dispatch(command, m.at("options"), out_path);
            if (command != "classify") write_manifest(out_path, command, m.at("options"));
            return rc;
        }

        json options;
        options["seed"] = seed;
        options["workers"] = workers;
        std::string command;
        if (c_classify->parsed()) {
            command = "classify";
            options["config"] = load_model(config_path).raw;
        } else if (c_surv->parsed()) {
            command = "survival";
            options["config"] = load_model(config_path).raw;
            options["t"] = t;
            options["n"] = n;
            options["quenched"] = quenched;
        } else if (c_rates->parsed()) {
            command = "rates";
            options["config"] = load_model(config_path).raw;
            options["t_grid"] = t_grid;
            options["n"] = n;
            options["method"] = method;
            options["fit"] = fit;
        } else if (c_ode->parsed()) {
            command = "ode-check";
            options["config"] = load_model(config_path).raw;
            options["t"] = t;
            options["n"] = n;
            options["tol"] = tol;
            options["lambdas"] = lambdas;
        } else if (c_phase->parsed()) {
            command = "phase-diagram";
            options["theta"] = theta_grid;
            options["gr"] = gr_grid;
        } else if (c_sim->parsed()) {
            command = "simulate";
            options["config"] = load_model(config_path).raw;
            options["horizon"] = horizon;
            options["n"] = n;
        }

        const int rc = dispatch(command, options, out_path);
        if (command != "classify") write_manifest(out_path, command, options);
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
