#pragma once

// Annealed Monte Carlo estimators over sampled environments, with exponential
// tilting as the variance-reduction tool. Every path draws its own substream
// of the master seed and the reduction is pairwise, so estimates are
// bit-identical across reruns and worker counts.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "csbp/env.hpp"
#include "csbp/mechanisms.hpp"
#include "csbp/stats.hpp"

namespace csbp {

// Positive nonincreasing test function applied to the exponential functional.
class TestFunctionSpec {
  public:
    // F(x) = 1 - exp(-x0 (c_plus beta x)^{-1/beta}): the survival probability
    // of a stable mechanism given functional value x.
    static TestFunctionSpec survival_form(double x0, double c_plus, double beta);
    // F(x) = C_F (x+1)^{-1/beta} [1 + (1+x)^{-sigma} h(x)] with h bounded
    // Lipschitz and sigma >= 1.
    static TestFunctionSpec general_form(double C_F, double beta, double sigma,
                                         std::function<double(double)> h);

    double operator()(double x) const { return eval_(x); }
    double beta() const { return beta_; }

  private:
    TestFunctionSpec(std::function<double(double)> eval, double beta)
        : eval_(std::move(eval)), beta_(beta) {}
    std::function<double(double)> eval_;
    double beta_;
};

enum class EstimatorKind { plain, esscher, feller_exact };

struct SurvivalEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
    EstimatorKind method = EstimatorKind::plain;
    double tilt = 0.0;
    double t = 0.0;
};

struct Method {
    EstimatorKind kind = EstimatorKind::plain;
    std::optional<double> tilt; // esscher: fixed tilt; empty means automatic

    static Method plain() { return {EstimatorKind::plain, std::nullopt}; }
    static Method esscher(double lam) { return {EstimatorKind::esscher, lam}; }
    static Method esscher_auto() { return {EstimatorKind::esscher, std::nullopt}; }
    static Method feller_exact() { return {EstimatorKind::feller_exact, std::nullopt}; }
};

// mean of F(int_0^t exp(-beta K_s) ds) over n environments
SurvivalEstimate a_F_plain(const TestFunctionSpec& F, const EnvironmentSpec& spec, double t,
                           std::size_t n, std::uint64_t seed, int workers = 1);

// unbiased tilted version: paths drawn under the tilted measure, each value
// weighted by exp(-tilt K_t + t phi_K(tilt))
SurvivalEstimate a_F_esscher(const TestFunctionSpec& F, const EnvironmentSpec& spec, double t,
                             double tilt, std::size_t n, std::uint64_t seed, int workers = 1);

// survival probability of a stable mechanism over random environments; the
// jump part comes from `spec` and the drift of K is the mechanism growth.
// Stable survival values are computed from the conditional closed form
// (branching noise integrated out exactly).
SurvivalEstimate annealed_survival(const StableMechanism& mech, double x0,
                                   const EnvironmentSpec& spec, double t, std::size_t n,
                                   const Method& method, std::uint64_t seed, int workers = 1);

// Recommended tilt for the regime of (spec jump part, growth): 1 in the
// strongly/intermediate subcritical regimes, tau in the weak one, 0 otherwise.
double recommended_tilt(const EnvironmentSpec& spec, double growth, double beta);

struct CltReport {
    double ks = 0.0;     // Kolmogorov distance of standardized log Y_t to N(0,1)
    double m_hat = 0.0;  // centering slope g + int log m nu(dm)
    double rho = 0.0;    // sqrt(int log(m)^2 nu(dm))
    std::size_t survivors = 0;
};

CltReport clt_check(const StableMechanism& mech, double x0, const EnvironmentSpec& spec,
                    double t, std::size_t n, std::uint64_t seed, int workers = 1);

struct MartingaleReport {
    SampleSummary scaled;  // Y_t exp(-K_t), target x0
    SampleSummary plain;   // Y_t, target x0 exp(t phi_K(1))
    double target_plain = 0.0;
};

MartingaleReport martingale_check(const StableMechanism& mech, double x0,
                                  const EnvironmentSpec& spec, double t, std::size_t n,
                                  std::uint64_t seed, int workers = 1);

struct WLimitEstimate {
    double survival_inf = 0.0;        // fraction of positive rescaled limits
    double survival_inf_stderr = 0.0;
    double mean_W = 0.0;
    double mean_W_stderr = 0.0;
    double absorption_complement = 0.0; // 1 - mean of per-path absorption estimates
};

WLimitEstimate w_limit_estimate(const StableMechanism& mech, double x0,
                                const EnvironmentSpec& spec, double t_large, std::size_t n,
                                std::uint64_t seed, int workers = 1);

} // namespace csbp
