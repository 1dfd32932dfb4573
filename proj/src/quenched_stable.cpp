#include "csbp/quenched_stable.hpp"

#include <cmath>
#include <stdexcept>

namespace csbp {

namespace {

void check_drift(const StableMechanism& mech, const JumpPath& path, const char* who) {
    if (std::abs(path.drift() - mech.g) > 1e-12 * (1.0 + std::abs(mech.g)))
        throw std::invalid_argument(std::string(who) +
                                    ": path drift must equal the mechanism growth rate");
}

// x0 * J^{-1/beta} evaluated through logs so tiny J does not overflow.
double exponent_from_J(double x0, double J, double beta) {
    if (!(J > 0.0)) return std::numeric_limits<double>::infinity();
    if (std::isinf(J)) return 0.0;
    const double log_a = std::log(x0) - std::log(J) / beta;
    if (log_a > 700.0) return std::numeric_limits<double>::infinity();
    return std::exp(log_a);
}

double absorption_from_J(double x0, double J, double beta) {
    const double a = exponent_from_J(x0, J, beta);
    return std::isinf(a) ? 0.0 : std::exp(-a);
}

// -expm1 keeps full relative precision when the survival chance is tiny.
double survival_from_J(double x0, double J, double beta) {
    const double a = exponent_from_J(x0, J, beta);
    return std::isinf(a) ? 1.0 : -std::expm1(-a);
}

} // namespace

QuenchedStableResult quenched_survival_detail(const StableMechanism& mech, double x0, double t,
                                              const JumpPath& path) {
    if (!(x0 > 0.0)) throw std::invalid_argument("quenched_survival: x0 must be > 0");
    if (!(t > 0.0)) throw std::invalid_argument("quenched_survival: t must be > 0");
    check_drift(mech, path, "quenched_survival");
    const double J = mech.c_plus * mech.beta * path.exp_functional(mech.beta, t);
    return {survival_from_J(x0, J, mech.beta), J};
}

double quenched_survival(const StableMechanism& mech, double x0, double t, const JumpPath& path) {
    return quenched_survival_detail(mech, x0, t, path).survival_prob;
}

double quenched_laplace(const StableMechanism& mech, double x0, double lam, double t,
                        const JumpPath& path) {
    if (lam < 0.0) throw std::domain_error("quenched_laplace: lam must be >= 0");
    if (lam == 0.0) return 1.0;
    check_drift(mech, path, "quenched_laplace");
    const double J = mech.c_plus * mech.beta * path.exp_functional(mech.beta, t);
    const double total = J + std::pow(lam, -mech.beta);
    return absorption_from_J(x0, total, mech.beta);
}

AbsorptionEstimate absorption_limit(const StableMechanism& mech, double x0,
                                    const JumpPath& path) {
    if (!(x0 > 0.0)) throw std::invalid_argument("absorption_limit: x0 must be > 0");
    check_drift(mech, path, "absorption_limit");
    const double T = path.horizon();
    const double J = mech.c_plus * mech.beta * path.exp_functional(mech.beta, T);
    AbsorptionEstimate est{absorption_from_J(x0, J, mech.beta),
                           std::numeric_limits<double>::quiet_NaN()};
    const double slope = path.value_at(T) / T;
    if (slope > 0.0) {
        // residual of the functional if K kept its realized linear growth
        est.tail_bound = std::exp(-mech.beta * path.value_at(T)) / (mech.beta * slope);
    }
    return est;
}

std::vector<double> sample_feller_grid(const StableMechanism& mech, double x0,
                                       std::span<const double> grid_times, const JumpPath& path,
                                       RngStream& rng) {
    if (mech.beta != 1.0)
        throw std::invalid_argument("sample_feller_grid: exact transitions need beta = 1");
    if (!(x0 > 0.0)) throw std::invalid_argument("sample_feller_grid: x0 must be > 0");
    check_drift(mech, path, "sample_feller_grid");

    std::vector<double> out;
    out.reserve(grid_times.size());
    double prev_t = 0.0;
    double y = x0;
    for (double t : grid_times) {
        if (t < prev_t) throw std::invalid_argument("sample_feller_grid: grid must be increasing");
        if (t > path.horizon() + 1e-12)
            throw std::out_of_range("sample_feller_grid: grid beyond horizon");
        if (t == prev_t || y == 0.0) {
            out.push_back(y);
            prev_t = t;
            continue;
        }
        const double J = mech.c_plus * path.exp_functional_between(1.0, prev_t, t);
        const double a = std::exp(path.value_at(t) - path.value_at(prev_t));
        const double mean = y / J;
        if (mean > 1e9) {
            // Gaussian limit of the compound transition; hitting zero is
            // beyond double-precision probability in this regime
            const double z = y + std::sqrt(2.0 * y * J) * rng.normal();
            y = std::max(z, 0.0) * a;
        } else {
            const double n = poisson(rng, mean);
            y = (n == 0.0) ? 0.0 : gamma_draw(rng, n, J * a);
        }
        out.push_back(y);
        prev_t = t;
    }
    return out;
}

} // namespace csbp
