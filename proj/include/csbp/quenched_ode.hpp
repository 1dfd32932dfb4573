#pragma once

// Numerical solution of the backward equation
//   dv/ds = exp(g s + d_s) * psi0(exp(-g s - d_s) v),   v(t) = lam,
// along a fixed environment path, integrated from s = t down to s = 0.
// Jump times of the path are mandatory mesh points: the coefficient is
// piecewise constant in d while v itself stays continuous.

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "csbp/env.hpp"
#include "csbp/mechanisms.hpp"

namespace csbp {

struct OdeSolution {
    double v0 = 0.0;                                // v(0)
    std::vector<std::pair<double, double>> trace;   // (s, v) at accepted steps
    double err_estimate = 0.0;                      // accumulated local error
    std::size_t steps = 0;
};

struct OdeOptions {
    double tol = 1e-9;
    bool keep_trace = false;
};

OdeSolution solve_backward(const StableMechanism& mech, double lam, double t,
                           const JumpPath& path, double tol);
OdeSolution solve_backward(const GeneralMechanism& mech, double lam, double t,
                           const JumpPath& path, double tol);
OdeSolution solve_backward_psi0(const std::function<double(double)>& psi0, double lam, double t,
                                const JumpPath& path, const OdeOptions& opts);

// One embedded step of the underlying pair on dv/ds = f(s, v); exposed so the
// convergence order can be measured with fixed steps.
std::pair<double, double> dopri5_step(const std::function<double(double, double)>& f, double s,
                                      double v, double h);

struct SurvivalBracket {
    double lower = 0.0;
    double upper = 1.0;
};

// Monotone bracketing of P(Y_t > 0 | path) from a ladder of lambda values:
// the largest lambda gives the lower bound, a tail extrapolation the upper.
// For mechanisms that do not identify extinction with absorption this is the
// absorption probability.
SurvivalBracket survival_general(const StableMechanism& mech, double x0, double t,
                                 const JumpPath& path, std::span<const double> lam_ladder,
                                 double tol = 1e-9);
SurvivalBracket survival_general(const GeneralMechanism& mech, double x0, double t,
                                 const JumpPath& path, std::span<const double> lam_ladder,
                                 double tol = 1e-9);

// Closed-form Feller bounds from the quadratic envelopes of psi: the larger
// diffusion kills faster, so it furnishes the lower bound.
SurvivalBracket survival_sandwich(const GeneralMechanism& mech, double x0, double t,
                                  const JumpPath& path);

} // namespace csbp
