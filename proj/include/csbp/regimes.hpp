#pragma once

// Classification of (environment, growth) pairs into the long-run survival
// regimes, with the predicted decay rate and polynomial correction, plus the
// regression harness that recovers those from Monte Carlo series.

#include <optional>
#include <span>
#include <string>

#include "csbp/env.hpp"

namespace csbp {

enum class RegimeLabel {
    Supercritical,
    Critical,
    StronglySubcritical,
    IntermediateSubcritical,
    WeaklySubcritical,
};

const char* to_string(RegimeLabel label);

struct RegimeReport {
    RegimeLabel label;
    double phi_K_prime0 = 0.0;
    std::optional<double> phi_K_prime1;
    std::optional<double> tau;        // interior minimizer, weak regime only
    double exp_rate = 0.0;            // rho <= 0: survival ~ t^-kappa exp(rho t)
    double poly_exponent = 0.0;       // kappa in {0, 1/2, 3/2}
};

// growth: the drift g entering K = g t + Delta. beta: stability index of the
// mechanism, needed only for the exponential-moment preconditions.
RegimeReport classify(const EnvironmentSpec& spec, double growth, double beta = 1.0);

// Root of phi_K' on (0,1); requires phi_K'(0) < 0 < phi_K'(1).
double find_tau(const EnvironmentSpec& spec, double growth);

struct RatePoint {
    double t;
    double estimate;
    double stderr_;
};

struct RateFit {
    double rho_hat = 0.0;
    double kappa_hat = 0.0;
    double r2 = 0.0;
};

// Weighted least squares of log(estimate) on (t, log t, 1).
RateFit fit_rate(std::span<const RatePoint> series);

} // namespace csbp
