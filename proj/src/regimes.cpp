#include "csbp/regimes.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "csbp/stats.hpp"

namespace csbp {

const char* to_string(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::Supercritical: return "Supercritical";
        case RegimeLabel::Critical: return "Critical";
        case RegimeLabel::StronglySubcritical: return "StronglySubcritical";
        case RegimeLabel::IntermediateSubcritical: return "IntermediateSubcritical";
        default: return "WeaklySubcritical";
    }
}

double find_tau(const EnvironmentSpec& spec, double growth) {
    auto d = [&](double lam) { return growth + spec.phi_prime(lam); };
    const double d0 = d(0.0);
    const double d1 = d(1.0);
    if (!(d0 < 0.0 && d1 > 0.0))
        throw std::domain_error("find_tau: needs phi_K'(0) < 0 < phi_K'(1)");
    double lo = 0.0, hi = 1.0, mid = 0.5;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double dm = d(mid);
        if (std::abs(dm) <= 1e-12) break;
        (dm < 0.0 ? lo : hi) = mid;
    }
    // cross-check: the root is the interior minimizer of phi_K on (0,1)
    const double val = growth * mid + spec.phi(mid);
    for (double s = 1e-3; s < 1.0; s += 1e-3) {
        if (growth * s + spec.phi(s) < val - 1e-9)
            throw std::logic_error("find_tau: located root is not the interior minimum");
    }
    return mid;
}

RegimeReport classify(const EnvironmentSpec& spec, double growth, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("classify: beta must be in (0,1]");
    const double tol = 1e-9 * (1.0 + std::abs(growth));
    const double theta = spec.theta_max();

    RegimeReport rep{};
    rep.phi_K_prime0 = growth + spec.phi_prime(0.0);

    if (rep.phi_K_prime0 > tol) {
        rep.label = RegimeLabel::Supercritical;
        rep.exp_rate = 0.0;
        rep.poly_exponent = 0.0;
        if (theta > 1.0) rep.phi_K_prime1 = growth + spec.phi_prime(1.0);
        return rep;
    }
    if (std::abs(rep.phi_K_prime0) <= tol) {
        if (!(theta > beta))
            throw std::domain_error("classify: critical branch needs theta_max > beta");
        rep.label = RegimeLabel::Critical;
        rep.exp_rate = 0.0;
        rep.poly_exponent = 0.5;
        if (theta > 1.0) rep.phi_K_prime1 = growth + spec.phi_prime(1.0);
        return rep;
    }

    // subcritical: the split is decided by the sign of phi_K'(1)
    if (!(theta > 1.0))
        throw std::domain_error("classify: subcritical branches need theta_max > 1");
    const double d1 = growth + spec.phi_prime(1.0);
    rep.phi_K_prime1 = d1;
    if (d1 < -tol) {
        rep.label = RegimeLabel::StronglySubcritical;
        rep.exp_rate = growth + spec.phi(1.0);
        rep.poly_exponent = 0.0;
        return rep;
    }
    if (std::abs(d1) <= tol) {
        rep.label = RegimeLabel::IntermediateSubcritical;
        rep.exp_rate = growth + spec.phi(1.0);
        rep.poly_exponent = 0.5;
        return rep;
    }
    if (!(theta > beta + 1.0))
        throw std::domain_error("classify: weakly subcritical branch needs theta_max > beta + 1");
    rep.label = RegimeLabel::WeaklySubcritical;
    const double tau = find_tau(spec, growth);
    rep.tau = tau;
    rep.exp_rate = growth * tau + spec.phi(tau);
    rep.poly_exponent = 1.5;
    return rep;
}

RateFit fit_rate(std::span<const RatePoint> series) {
    if (series.size() < 6) throw std::invalid_argument("fit_rate: need at least 6 time points");
    std::vector<double> t, logt, y, w;
    bool all_weighted = true;
    for (const RatePoint& p : series) {
        if (!(p.estimate > 0.0)) continue; // dropped
        t.push_back(p.t);
        logt.push_back(std::log(p.t));
        y.push_back(std::log(p.estimate));
        if (!(p.stderr_ > 0.0)) all_weighted = false;
    }
    if (y.size() < 4) throw std::invalid_argument("fit_rate: fewer than 4 positive estimates");
    // weights 1/se^2 on the log scale when stderr is available for every point
    w.assign(y.size(), 1.0);
    if (all_weighted) {
        std::size_t i = 0;
        for (const RatePoint& p : series) {
            if (!(p.estimate > 0.0)) continue;
            const double se_log = p.stderr_ / p.estimate;
            w[i++] = 1.0 / (se_log * se_log);
        }
    }
    const LinearFit3 fit = weighted_least_squares(t, logt, y, w);
    RateFit out;
    out.rho_hat = fit.b1;
    out.kappa_hat = -fit.b2;
    out.r2 = fit.r2;
    return out;
}

} // namespace csbp
