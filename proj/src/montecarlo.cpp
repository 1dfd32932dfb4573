#include "csbp/montecarlo.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "csbp/parallel.hpp"
#include "csbp/quenched_stable.hpp"
#include "csbp/regimes.hpp"

namespace csbp {

TestFunctionSpec TestFunctionSpec::survival_form(double x0, double c_plus, double beta) {
    if (!(x0 > 0.0 && c_plus > 0.0 && beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("survival_form: need x0 > 0, c_plus > 0, beta in (0,1]");
    auto eval = [x0, c_plus, beta](double x) {
        if (!(x > 0.0)) return 1.0;
        if (std::isinf(x)) return 0.0;
        const double log_a = std::log(x0) - std::log(c_plus * beta * x) / beta;
        if (log_a > 700.0) return 1.0;
        return -std::expm1(-std::exp(log_a));
    };
    return TestFunctionSpec(eval, beta);
}

TestFunctionSpec TestFunctionSpec::general_form(double C_F, double beta, double sigma,
                                                std::function<double(double)> h) {
    if (!(C_F > 0.0 && beta > 0.0 && beta <= 1.0 && sigma >= 1.0))
        throw std::invalid_argument("general_form: need C_F > 0, beta in (0,1], sigma >= 1");
    auto eval = [C_F, beta, sigma, h](double x) {
        const double core = std::pow(1.0 + x, -1.0 / beta);
        const double corr = h ? std::pow(1.0 + x, -sigma) * h(x) : 0.0;
        return C_F * core * (1.0 + corr);
    };
    return TestFunctionSpec(eval, beta);
}

namespace {

SurvivalEstimate reduce(const std::vector<double>& values, EstimatorKind kind, double tilt,
                        double t) {
    const SampleSummary s = summarize(values);
    SurvivalEstimate est;
    est.value = s.mean;
    est.stderr_ = s.stderr_;
    est.n = s.n;
    est.method = kind;
    est.tilt = tilt;
    est.t = t;
    return est;
}

} // namespace

SurvivalEstimate a_F_plain(const TestFunctionSpec& F, const EnvironmentSpec& spec, double t,
                           std::size_t n, std::uint64_t seed, int workers) {
    if (n < 1) throw std::invalid_argument("a_F_plain: need n >= 1");
    const double beta = F.beta();
    std::vector<double> values(n);
    parallel_for(n, workers, [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, i);
        const JumpPath path = spec.sample_path(t, rng);
        values[i] = F(path.exp_functional(beta, t));
    });
    return reduce(values, EstimatorKind::plain, 0.0, t);
}

SurvivalEstimate a_F_esscher(const TestFunctionSpec& F, const EnvironmentSpec& spec, double t,
                             double tilt, std::size_t n, std::uint64_t seed, int workers) {
    if (n < 1) throw std::invalid_argument("a_F_esscher: need n >= 1");
    const double beta = F.beta();
    const EnvironmentSpec tilted = spec.esscher(tilt);
    const double rate_correction = t * spec.phi_K(tilt);
    std::vector<double> values(n);
    parallel_for(n, workers, [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, i);
        const JumpPath path = tilted.sample_path(t, rng);
        const double f = F(path.exp_functional(beta, t));
        const double w = std::exp(-tilt * path.value_at(t) + rate_correction);
        values[i] = f * w;
    });
    return reduce(values, EstimatorKind::esscher, tilt, t);
}

double recommended_tilt(const EnvironmentSpec& spec, double growth, double beta) {
    const RegimeReport rep = classify(spec, growth, beta);
    switch (rep.label) {
        case RegimeLabel::StronglySubcritical:
        case RegimeLabel::IntermediateSubcritical: return 1.0;
        case RegimeLabel::WeaklySubcritical: return *rep.tau;
        default: return 0.0;
    }
}

SurvivalEstimate annealed_survival(const StableMechanism& mech, double x0,
                                   const EnvironmentSpec& spec, double t, std::size_t n,
                                   const Method& method, std::uint64_t seed, int workers) {
    const EnvironmentSpec env = spec.with_drift(mech.g);
    if (method.kind == EstimatorKind::feller_exact) {
        if (mech.beta != 1.0)
            throw std::invalid_argument("annealed_survival: feller_exact needs beta = 1");
        std::vector<double> values(n);
        const double grid[1] = {t};
        parallel_for(n, workers, [&](std::size_t i) {
            RngStream rng = RngStream::substream(seed, i);
            const JumpPath path = env.sample_path(t, rng);
            const auto y = sample_feller_grid(mech, x0, grid, path, rng);
            values[i] = y[0] > 0.0 ? 1.0 : 0.0;
        });
        SurvivalEstimate est = reduce(values, EstimatorKind::feller_exact, 0.0, t);
        return est;
    }
    const TestFunctionSpec F = TestFunctionSpec::survival_form(x0, mech.c_plus, mech.beta);
    if (method.kind == EstimatorKind::plain) return a_F_plain(F, env, t, n, seed, workers);
    const double tilt =
        method.tilt ? *method.tilt : recommended_tilt(env, mech.g, mech.beta);
    if (tilt == 0.0) return a_F_plain(F, env, t, n, seed, workers);
    return a_F_esscher(F, env, t, tilt, n, seed, workers);
}

CltReport clt_check(const StableMechanism& mech, double x0, const EnvironmentSpec& spec,
                    double t, std::size_t n, std::uint64_t seed, int workers) {
    if (mech.beta != 1.0) throw std::invalid_argument("clt_check: needs beta = 1");
    const EnvironmentSpec env = spec.with_drift(mech.g);
    if (!(env.phi_K_prime(0.0) > 0.0))
        throw std::domain_error("clt_check: environment must be supercritical");
    const double rho2 = env.log_moment2();
    if (!std::isfinite(rho2)) throw std::domain_error("clt_check: infinite log-second moment");

    CltReport rep;
    rep.m_hat = mech.g + env.log_moment1();
    rep.rho = std::sqrt(rho2);

    std::vector<double> logy(n, std::numeric_limits<double>::quiet_NaN());
    const double grid[1] = {t};
    parallel_for(n, workers, [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, i);
        const JumpPath path = env.sample_path(t, rng);
        const auto y = sample_feller_grid(mech, x0, grid, path, rng);
        if (y[0] > 0.0) logy[i] = std::log(y[0]);
    });
    std::vector<double> standardized;
    standardized.reserve(n);
    const double scale = rep.rho * std::sqrt(t);
    for (double v : logy)
        if (!std::isnan(v)) standardized.push_back((v - rep.m_hat * t) / scale);
    rep.survivors = standardized.size();
    if (rep.survivors < 500)
        throw std::runtime_error("clt_check: fewer than 500 survivors; raise n or t");
    rep.ks = ks_normal(std::move(standardized));
    return rep;
}

MartingaleReport martingale_check(const StableMechanism& mech, double x0,
                                  const EnvironmentSpec& spec, double t, std::size_t n,
                                  std::uint64_t seed, int workers) {
    if (mech.beta != 1.0) throw std::invalid_argument("martingale_check: needs beta = 1");
    const EnvironmentSpec env = spec.with_drift(mech.g);
    std::vector<double> scaled(n), plain(n);
    if (t == 0.0) {
        std::fill(scaled.begin(), scaled.end(), x0);
        std::fill(plain.begin(), plain.end(), x0);
    } else {
        const double grid[1] = {t};
        parallel_for(n, workers, [&](std::size_t i) {
            RngStream rng = RngStream::substream(seed, i);
            const JumpPath path = env.sample_path(t, rng);
            const auto y = sample_feller_grid(mech, x0, grid, path, rng);
            plain[i] = y[0];
            scaled[i] = y[0] * std::exp(-path.value_at(t));
        });
    }
    MartingaleReport rep;
    rep.scaled = summarize(scaled);
    rep.plain = summarize(plain);
    rep.target_plain = x0 * std::exp(t == 0.0 ? 0.0 : t * env.phi_K(1.0));
    return rep;
}

WLimitEstimate w_limit_estimate(const StableMechanism& mech, double x0,
                                const EnvironmentSpec& spec, double t_large, std::size_t n,
                                std::uint64_t seed, int workers) {
    if (mech.beta != 1.0) throw std::invalid_argument("w_limit_estimate: needs beta = 1");
    const EnvironmentSpec env = spec.with_drift(mech.g);
    std::vector<double> w(n), alive(n), absorbed(n);
    parallel_for(n, workers, [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, i);
        const JumpPath path = env.sample_path(t_large, rng);
        // rescaled state: the transition over [0, t] in the scaled variable is
        // compound Poisson of Gamma blocks with J = c_plus int exp(-K)
        const double J = mech.c_plus * path.exp_functional(1.0, t_large);
        const double mean = x0 / J;
        double z;
        if (mean > 1e9) {
            z = std::max(x0 + std::sqrt(2.0 * x0 * J) * rng.normal(), 0.0);
        } else {
            const double cnt = poisson(rng, mean);
            z = cnt == 0.0 ? 0.0 : gamma_draw(rng, cnt, J);
        }
        w[i] = z;
        alive[i] = z > 0.0 ? 1.0 : 0.0;
        absorbed[i] = absorption_limit(mech, x0, path).absorption_prob;
    });
    WLimitEstimate est;
    const SampleSummary sw = summarize(w);
    const SampleSummary sa = summarize(alive);
    const SampleSummary sab = summarize(absorbed);
    est.mean_W = sw.mean;
    est.mean_W_stderr = sw.stderr_;
    est.survival_inf = sa.mean;
    est.survival_inf_stderr = sa.stderr_;
    est.absorption_complement = 1.0 - sab.mean;
    return est;
}

} // namespace csbp
