#include "csbp/cellmodel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "csbp/special.hpp"

namespace csbp {

double ThetaLaw::mellin(double lam) const {
    if (kind == Kind::two_point)
        return 0.5 * (std::pow(theta, lam) + std::pow(1.0 - theta, lam));
    return std::exp(std::lgamma(alpha + lam) + std::lgamma(alpha + beta_param) -
                    std::lgamma(alpha) - std::lgamma(alpha + beta_param + lam));
}

double ThetaLaw::mean_log_inverse() const {
    if (kind == Kind::two_point) return -0.5 * (std::log(theta) + std::log(1.0 - theta));
    return digamma(alpha + beta_param) - digamma(alpha);
}

double ThetaLaw::mean_theta_log_inverse() const {
    if (kind == Kind::two_point)
        return -0.5 * (theta * std::log(theta) + (1.0 - theta) * std::log(1.0 - theta));
    // E[Theta log Theta] for Beta(a,b) = E[Theta] (psi(a+1) - psi(a+b+1))
    const double mean = alpha / (alpha + beta_param);
    return -mean * (digamma(alpha + 1.0) - digamma(alpha + beta_param + 1.0));
}

std::pair<EnvironmentSpec, StableMechanism> to_environment(const CellModel& model,
                                                           bool size_biased) {
    if (!(model.r > 0.0)) throw std::invalid_argument("to_environment: division rate must be > 0");
    if (!(model.sigma2 > 0.0)) throw std::invalid_argument("to_environment: sigma2 must be > 0");
    const double total = (size_biased ? 2.0 : 1.0) * model.r;
    std::vector<Atom> atoms;
    std::vector<ComponentPtr> comps;
    if (model.theta.kind == ThetaLaw::Kind::two_point) {
        const double th = model.theta.theta;
        if (!(th > 0.0 && th < 1.0))
            throw std::invalid_argument("to_environment: theta must lie in (0,1)");
        if (th == 0.5) {
            atoms.push_back({0.5, total});
        } else {
            atoms.push_back({th, 0.5 * total});
            atoms.push_back({1.0 - th, 0.5 * total});
        }
    } else {
        comps.push_back(make_beta_component(total, model.theta.alpha, model.theta.beta_param));
    }
    EnvironmentSpec env(model.g, std::move(atoms), std::move(comps));
    StableMechanism mech{model.g, model.sigma2, 1.0};
    return {std::move(env), mech};
}

InfectedRegimeReport infected_regime(const CellModel& model) {
    const auto [env, mech] = to_environment(model);
    const RegimeReport rep = classify(env, model.g, 1.0);

    // alpha = min over [0,1] of g lam + 2r (E[Theta^lam] - 1/2), located by
    // golden section; the objective is convex because E[Theta^lam] is
    // log-convex in lam.
    auto objective = [&](double lam) {
        return model.g * lam + 2.0 * model.r * (model.theta.mellin(lam) - 0.5);
    };
    double a = 0.0, b = 1.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while (b - a > 1e-12) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = objective(x2);
        }
    }
    const double alpha =
        std::min({objective(0.5 * (a + b)), objective(0.0), objective(1.0)});

    InfectedRegimeReport out;
    out.label = rep.label;
    out.alpha = alpha;
    out.poly_exponent = rep.poly_exponent;
    // E[N*_t] = e^{rt} P(Y_t > 0), so the regime rate shifts by r.
    out.growth_exponent = model.r + rep.exp_rate;

    std::ostringstream form;
    form.precision(6);
    form << "E[N*_t] ~ c";
    if (out.poly_exponent != 0.0) form << " t^-" << out.poly_exponent;
    form << " exp(" << out.growth_exponent << " t)";
    out.form = form.str();
    return out;
}

std::vector<PhaseCell> phase_diagram(const std::vector<double>& theta_grid,
                                     const std::vector<double>& g_over_r_grid) {
    std::vector<PhaseCell> cells;
    cells.reserve(theta_grid.size() * g_over_r_grid.size());
    for (double th : theta_grid) {
        if (!(th > 0.0 && th < 0.5))
            throw std::invalid_argument("phase_diagram: theta grid must lie in (0, 1/2)");
        const double b_super = -std::log(th * (1.0 - th));
        const double b_strong = -th * std::log(th) - (1.0 - th) * std::log(1.0 - th);
        for (double gr : g_over_r_grid) {
            CellModel m;
            m.g = gr;
            m.sigma2 = 1.0;
            m.r = 1.0;
            m.theta = ThetaLaw{ThetaLaw::Kind::two_point, th, 1.0, 1.0};
            const auto [env, mech] = to_environment(m);
            const RegimeReport rep = classify(env, m.g, 1.0);
            cells.push_back({th, gr, rep.label, b_super, b_strong});
        }
    }
    return cells;
}

MeanInfectedEstimate mean_infected(const CellModel& model, double t, std::size_t n,
                                   std::uint64_t seed, int workers) {
    if (!(t > 0.0)) throw std::invalid_argument("mean_infected: t must be > 0");
    const auto [env, mech] = to_environment(model);
    const SurvivalEstimate s =
        annealed_survival(mech, 1.0, env, t, n, Method::esscher_auto(), seed, workers);
    const double scale = std::exp(model.r * t);
    MeanInfectedEstimate out;
    out.value = scale * s.value;
    out.stderr_ = scale * s.stderr_;
    out.t = t;
    out.n = n;
    return out;
}

} // namespace csbp
