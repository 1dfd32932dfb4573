#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace csbp {

// Order-independent summation: results do not depend on how samples were
// distributed over workers.
double pairwise_sum(std::span<const double> values);

struct SampleSummary {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

SampleSummary summarize(std::span<const double> values);

double normal_cdf(double x);

// One-sample Kolmogorov distance against the standard normal.
double ks_normal(std::vector<double> values);

// Two-sample Kolmogorov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Least squares of y on (x1, x2, 1) with per-point weights.
struct LinearFit3 {
    double b1 = 0.0;
    double b2 = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit3 weighted_least_squares(std::span<const double> x1, std::span<const double> x2,
                                  std::span<const double> y, std::span<const double> w);

// Slope of log(y) against log(x); used for empirical convergence orders.
double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace csbp
