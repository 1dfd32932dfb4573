#pragma once

// Bounded-variation catastrophe environments.
//
// The environment is the Levy process K_t = g*t + sum_{s<=t} log(m_s), where
// the multipliers m arrive as a finite-activity compound Poisson process with
// measure nu (atoms plus density components). A realized trajectory is a
// JumpPath; between jumps K is affine, which is what makes the exponential
// functional int_0^t exp(-beta K_s) ds exactly computable segment by segment.

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "csbp/rng.hpp"

namespace csbp {

struct Atom {
    double m;    // multiplier, > 0 and != 1
    double rate; // > 0
};

// One component of the jump measure: `rate` total mass distributed over a
// multiplier law M on (0, inf). Immutable and shareable across workers.
class JumpSizeComponent {
  public:
    virtual ~JumpSizeComponent() = default;
    virtual double rate() const = 0;
    // E[M^s (log M)^k] under the normalized law, k in {0,1,2}.
    virtual double moment(double s, int k) const = 0;
    // sup { s : E[M^s] < inf }; +inf for bounded support.
    virtual double theta_sup() const = 0;
    virtual double sample(RngStream& rng) const = 0;
    // Law reweighted by m^lam, rate scaled by E[M^lam].
    virtual std::shared_ptr<const JumpSizeComponent> tilt(double lam) const = 0;
    virtual std::string describe() const = 0;

    double mellin(double s) const { return moment(s, 0); }
    double mellin_log(double s) const { return moment(s, 1); }
};

using ComponentPtr = std::shared_ptr<const JumpSizeComponent>;

// density proportional to m^exponent on (lo, hi), 0 < lo < hi < inf
ComponentPtr make_power_component(double rate, double exponent, double lo, double hi);
// Beta(alpha, beta) on (0,1); alpha, beta >= 1 so the density stays bounded
ComponentPtr make_beta_component(double rate, double alpha, double beta);
// density alpha * m0^alpha * m^-(alpha+1) on (m0, inf); theta_sup = alpha
ComponentPtr make_pareto_component(double rate, double alpha, double m0);
// density c * |m-1|^-gamma on (lo, hi) with 1 outside [lo, hi]; rate from mass
ComponentPtr make_singular_component(double c, double gamma, double lo, double hi);

struct Jump {
    double time;
    double log_m;
};

struct DiscretizedFunctional {
    double a_pq;  // sum_{i=0..p} exp(-beta K_{i/q})
    double lower; // pathwise lower bound for int_0^{p/q} exp(-beta K_s) ds
    double upper; // pathwise upper bound
};

class JumpPath {
  public:
    JumpPath(double horizon, double drift, std::vector<Jump> jumps);

    double horizon() const { return horizon_; }
    double drift() const { return drift_; }
    const std::vector<Jump>& jumps() const { return jumps_; }

    // Delta_t: accumulated log-multipliers up to and including time t.
    double delta_at(double t) const;
    // K_t = drift * t + Delta_t.
    double value_at(double t) const;

    // Exact int_0^t exp(-beta K_s) ds for beta in (0,1].
    double exp_functional(double beta, double t) const;
    // Exact int_a^b exp(-beta (K_s - K_a)) ds; overflow-safe for large K_a.
    double exp_functional_between(double beta, double a, double b) const;
    // Exact int_0^t exp(mult * K_s) ds for any mult != 0 (no sign restriction).
    double exp_integral_general(double mult, double t) const;

    DiscretizedFunctional discretized_functional(double beta, long p, long q) const;

    JumpPath with_drift(double drift) const;

  private:
    double integral_exp(double mult, double a, double b, double offset) const;

    double horizon_;
    double drift_;
    std::vector<Jump> jumps_;
    std::vector<double> cum_log_; // prefix sums of log_m
};

class EnvironmentSpec {
  public:
    EnvironmentSpec(double drift, std::vector<Atom> atoms,
                    std::vector<ComponentPtr> components = {});

    double drift() const { return drift_; }
    double total_jump_rate() const { return total_rate_; }
    double theta_max() const { return theta_max_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<ComponentPtr>& components() const { return components_; }

    // Laplace exponent of the jump part: phi(lam) = int (m^lam - 1) nu(dm).
    double phi(double lam) const;
    double phi_prime(double lam) const;
    // Laplace exponent of K: phi_K(lam) = drift*lam + phi(lam), and derivative.
    double phi_K(double lam) const;
    double phi_K_prime(double lam) const;

    double log_moment1() const; // int log(m) nu(dm)
    double log_moment2() const; // int log(m)^2 nu(dm)

    EnvironmentSpec with_drift(double drift) const;

    // Exponential change of measure: rates reweighted by m^lam, drift kept.
    EnvironmentSpec esscher(double lam) const;

    JumpPath sample_path(double horizon, RngStream& rng) const;

  private:
    void check_lambda(double lam, const char* who) const;

    double drift_;
    std::vector<Atom> atoms_;
    std::vector<ComponentPtr> components_;
    double total_rate_ = 0.0;
    double theta_max_ = std::numeric_limits<double>::infinity();
};

// Density c * |m-1|^-gamma on (lo, hi) \ {1}; mass near 1 may be infinite.
struct SingularDensity {
    double c;
    double gamma;
    double lo; // >= 0
    double hi; // may be +inf (then gamma > 1 is required)
};

// Restriction of the singular density to (lo, 1-eps1) u (1+eps2, hi) as a
// finite-activity environment. Requires 0 < eps1 < 1 and eps2 > 0.
EnvironmentSpec truncate_singular(double drift, const SingularDensity& density,
                                  double eps1, double eps2);

} // namespace csbp
