#pragma once

// Closed-form conditional (quenched) quantities for stable mechanisms, and the
// exact transition sampler they imply in the Feller case (beta = 1).

#include <span>
#include <vector>

#include "csbp/env.hpp"
#include "csbp/mechanisms.hpp"
#include "csbp/rng.hpp"

namespace csbp {

struct QuenchedStableResult {
    double survival_prob; // P(Y_t > 0 | path)
    double functional_J;  // c_plus * beta * int_0^t exp(-beta K_s) ds
};

// P(Y_t > 0 | path) = 1 - exp(-x0 * J^{-1/beta}).
double quenched_survival(const StableMechanism& mech, double x0, double t, const JumpPath& path);
QuenchedStableResult quenched_survival_detail(const StableMechanism& mech, double x0, double t,
                                              const JumpPath& path);

// E[exp(-lam * e^{-K_t} Y_t) | path] = exp(-x0 (J + lam^{-beta})^{-1/beta}).
double quenched_laplace(const StableMechanism& mech, double x0, double lam, double t,
                        const JumpPath& path);

struct AbsorptionEstimate {
    double absorption_prob; // lower approximation, increasing in the horizon
    double tail_bound;      // residual-functional bound when K grows linearly; NaN otherwise
};

AbsorptionEstimate absorption_limit(const StableMechanism& mech, double x0, const JumpPath& path);

// Exact law of Y at the grid times given the path (beta = 1 only): over each
// interval the conditional transition is compound-Poisson of exponentials,
// sampled as N ~ Poisson(y/J) then Gamma(N, J*a). Zero is absorbing.
std::vector<double> sample_feller_grid(const StableMechanism& mech, double x0,
                                       std::span<const double> grid_times, const JumpPath& path,
                                       RngStream& rng);

} // namespace csbp
