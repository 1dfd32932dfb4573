#pragma once

#include <functional>

namespace csbp {

double digamma(double x);
double trigamma(double x);

// Adaptive Simpson quadrature on [a, b] with a relative tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

} // namespace csbp
