#include "csbp/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "csbp/special.hpp"

namespace csbp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// int_a^b m^p log(m)^k dm, closed form.
double power_integral(double p, int k, double a, double b) {
    const double la = std::log(a);
    const double lb = std::log(b);
    if (std::abs(p + 1.0) < 1e-12) {
        switch (k) {
            case 0: return lb - la;
            case 1: return 0.5 * (lb * lb - la * la);
            default: return (lb * lb * lb - la * la * la) / 3.0;
        }
    }
    const double q = p + 1.0;
    const double pa = std::pow(a, q);
    const double pb = std::pow(b, q);
    switch (k) {
        case 0: return (pb - pa) / q;
        case 1: return (pb * lb - pa * la) / q - (pb - pa) / (q * q);
        default:
            return (pb * lb * lb - pa * la * la) / q - 2.0 * (pb * lb - pa * la) / (q * q) +
                   2.0 * (pb - pa) / (q * q * q);
    }
}

class PowerComponent final : public JumpSizeComponent {
  public:
    PowerComponent(double rate, double exponent, double lo, double hi)
        : rate_(rate), exponent_(exponent), lo_(lo), hi_(hi) {
        if (!(rate > 0.0)) throw std::invalid_argument("power component: rate must be > 0");
        if (!(0.0 < lo && lo < hi && std::isfinite(hi)))
            throw std::invalid_argument("power component: need 0 < lo < hi < inf");
        norm_ = power_integral(exponent_, 0, lo_, hi_);
    }

    double rate() const override { return rate_; }
    double theta_sup() const override { return kInf; }

    double moment(double s, int k) const override {
        return power_integral(exponent_ + s, k, lo_, hi_) / norm_;
    }

    double sample(RngStream& rng) const override {
        const double u = rng.uniform01();
        const double q = exponent_ + 1.0;
        if (std::abs(q) < 1e-12) return lo_ * std::pow(hi_ / lo_, u);
        const double pa = std::pow(lo_, q);
        const double pb = std::pow(hi_, q);
        return std::pow(pa + u * (pb - pa), 1.0 / q);
    }

    ComponentPtr tilt(double lam) const override {
        return std::make_shared<PowerComponent>(rate_ * moment(lam, 0), exponent_ + lam, lo_,
                                                hi_);
    }

    std::string describe() const override {
        return "power(rate=" + fmt(rate_) + ",exponent=" + fmt(exponent_) + ",lo=" + fmt(lo_) +
               ",hi=" + fmt(hi_) + ")";
    }

  private:
    double rate_, exponent_, lo_, hi_, norm_;
};

class BetaComponent final : public JumpSizeComponent {
  public:
    BetaComponent(double rate, double alpha, double beta)
        : rate_(rate), alpha_(alpha), beta_(beta) {
        if (!(rate > 0.0)) throw std::invalid_argument("beta component: rate must be > 0");
        if (!(alpha >= 1.0 && beta >= 1.0))
            throw std::invalid_argument("beta component: bounded density needs alpha, beta >= 1");
    }

    double rate() const override { return rate_; }
    double theta_sup() const override { return kInf; }

    double moment(double s, int k) const override {
        const double m0 = std::exp(std::lgamma(alpha_ + s) + std::lgamma(alpha_ + beta_) -
                                   std::lgamma(alpha_) - std::lgamma(alpha_ + beta_ + s));
        const double d1 = digamma(alpha_ + s) - digamma(alpha_ + beta_ + s);
        switch (k) {
            case 0: return m0;
            case 1: return m0 * d1;
            default: return m0 * (d1 * d1 + trigamma(alpha_ + s) - trigamma(alpha_ + beta_ + s));
        }
    }

    double sample(RngStream& rng) const override { return beta_draw(rng, alpha_, beta_); }

    ComponentPtr tilt(double lam) const override {
        return std::make_shared<BetaComponent>(rate_ * moment(lam, 0), alpha_ + lam, beta_);
    }

    std::string describe() const override {
        return "beta(rate=" + fmt(rate_) + ",alpha=" + fmt(alpha_) + ",beta=" + fmt(beta_) + ")";
    }

  private:
    double rate_, alpha_, beta_;
};

class ParetoComponent final : public JumpSizeComponent {
  public:
    ParetoComponent(double rate, double alpha, double m0) : rate_(rate), alpha_(alpha), m0_(m0) {
        if (!(rate > 0.0)) throw std::invalid_argument("pareto component: rate must be > 0");
        if (!(alpha > 0.0 && m0 > 0.0))
            throw std::invalid_argument("pareto component: need alpha > 0 and m0 > 0");
    }

    double rate() const override { return rate_; }
    double theta_sup() const override { return alpha_; }

    double moment(double s, int k) const override {
        if (!(s < alpha_))
            throw std::domain_error("pareto component: moment diverges for s >= alpha");
        // log M = log m0 + E/alpha with E standard exponential.
        const double c = std::log(m0_);
        const double rho = 1.0 - s / alpha_;
        const double base = std::pow(m0_, s);
        switch (k) {
            case 0: return base / rho;
            case 1: return base * (c / rho + 1.0 / (alpha_ * rho * rho));
            default:
                return base * (c * c / rho + 2.0 * c / (alpha_ * rho * rho) +
                               2.0 / (alpha_ * alpha_ * rho * rho * rho));
        }
    }

    double sample(RngStream& rng) const override {
        return m0_ * std::exp(rng.exponential() / alpha_);
    }

    ComponentPtr tilt(double lam) const override {
        if (!(lam < alpha_))
            throw std::domain_error("pareto component: tilt requires lam < alpha");
        return std::make_shared<ParetoComponent>(rate_ * moment(lam, 0), alpha_ - lam,
                                                 m0_);
    }

    std::string describe() const override {
        return "pareto(rate=" + fmt(rate_) + ",alpha=" + fmt(alpha_) + ",m0=" + fmt(m0_) + ")";
    }

  private:
    double rate_, alpha_, m0_;
};

// One-sided piece of c |m-1|^-gamma, support strictly left or right of 1,
// optionally tilted by m^tilt_s. Right pieces may extend to +inf when the
// tail is integrable (gamma - tilt_s > 1).
class SingularPiece final : public JumpSizeComponent {
  public:
    SingularPiece(double c, double gamma, double lo, double hi, double tilt_s)
        : c_(c), gamma_(gamma), lo_(lo), hi_(hi), tilt_(tilt_s) {
        if (!(c > 0.0)) throw std::invalid_argument("singular component: c must be > 0");
        if (!(lo >= 0.0 && lo < hi)) throw std::invalid_argument("singular component: bad support");
        right_ = lo_ >= 1.0;
        if (!right_ && !(hi_ <= 1.0))
            throw std::invalid_argument("singular component: support must avoid 1");
        if (!std::isfinite(hi_)) {
            if (!right_) throw std::invalid_argument("singular component: unbounded left piece");
            if (!(gamma_ - tilt_ > 1.0))
                throw std::domain_error("singular component: infinite mass on unbounded support");
        }
        mass_ = raw_integral(tilt_, 0);
        if (!(mass_ > 0.0) || !std::isfinite(mass_))
            throw std::domain_error("singular component: non-finite mass");
    }

    double rate() const override { return mass_; }

    double theta_sup() const override {
        return std::isfinite(hi_) ? kInf : gamma_ - 1.0 - tilt_;
    }

    double moment(double s, int k) const override {
        if (!(s < theta_sup() || std::isfinite(hi_)))
            throw std::domain_error("singular component: moment diverges");
        return raw_integral(tilt_ + s, k) / mass_;
    }

    double sample(RngStream& rng) const override {
        if (tilt_ == 0.0) return sample_untilted(rng, gamma_, lo_, hi_);
        if (std::isfinite(hi_)) {
            // rejection with envelope max(lo^t, hi^t) over the untilted piece
            const double bound = std::max(std::pow(lo_, tilt_), std::pow(hi_, tilt_));
            for (;;) {
                const double m = sample_untilted(rng, gamma_, lo_, hi_);
                if (rng.uniform01() * bound <= std::pow(m, tilt_)) return m;
            }
        }
        // unbounded: propose from the gamma-shifted piece, ratio (m/(m-1))^t
        const double bound = std::pow(lo_ / (lo_ - 1.0), tilt_);
        for (;;) {
            const double m = sample_untilted(rng, gamma_ - tilt_, lo_, hi_);
            if (rng.uniform01() * bound <= std::pow(m / (m - 1.0), tilt_)) return m;
        }
    }

    ComponentPtr tilt(double lam) const override {
        return std::make_shared<SingularPiece>(c_, gamma_, lo_, hi_, tilt_ + lam);
    }

    std::string describe() const override {
        return "singular(c=" + fmt(c_) + ",gamma=" + fmt(gamma_) + ",lo=" + fmt(lo_) +
               ",hi=" + fmt(hi_) + ",tilt=" + fmt(tilt_) + ")";
    }

  private:
    // c * int m^s log(m)^k |m-1|^-gamma dm over the support.
    double raw_integral(double s, int k) const {
        if (std::isfinite(hi_)) {
            // substitute w = |1-m|^{1-gamma}; the Jacobian absorbs the singularity
            const double e = 1.0 - gamma_;
            const double wa = std::pow(std::abs(1.0 - lo_), e);
            const double wb = std::pow(std::abs(1.0 - hi_), e);
            const double w0 = std::min(wa, wb);
            const double w1 = std::max(wa, wb);
            const bool right = right_;
            auto f = [&](double w) {
                const double m = right ? 1.0 + std::pow(w, 1.0 / e) : 1.0 - std::pow(w, 1.0 / e);
                const double lm = std::log(m);
                double v = std::pow(m, s);
                for (int i = 0; i < k; ++i) v *= lm;
                return v;
            };
            return c_ / std::abs(e) * integrate(f, w0, w1, 1e-11);
        }
        // unbounded right tail: substitute m = 1 + exp(x); the integrand is
        // exp(s log m + (1-gamma) x), which decays like exp(-(gamma-1-s) x)
        const double decay = gamma_ - 1.0 - s;
        if (!(decay > 0.0)) throw std::domain_error("singular component: integral diverges");
        const double x0 = std::log(lo_ - 1.0);
        const double x1 = std::max(x0, 0.0) + 60.0 / std::min(decay, 1.0);
        auto f = [&](double x) {
            const double lm = x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
            double v = std::exp(s * lm + (1.0 - gamma_) * x);
            for (int i = 0; i < k; ++i) v *= lm;
            return v;
        };
        return c_ * integrate(f, x0, x1, 1e-11);
    }

    static double sample_untilted(RngStream& rng, double gamma, double lo, double hi) {
        const double u = rng.uniform01();
        const bool right = lo >= 1.0;
        const double da = right ? lo - 1.0 : 1.0 - lo;
        const double db = right ? (std::isfinite(hi) ? hi - 1.0 : kInf) : 1.0 - hi;
        if (std::abs(gamma - 1.0) < 1e-12) {
            const double l = std::exp((1.0 - u) * std::log(da) + u * std::log(db));
            return right ? 1.0 + l : 1.0 - l;
        }
        const double e = 1.0 - gamma;
        const double wa = std::pow(da, e);
        const double wb = std::isfinite(db) ? std::pow(db, e) : 0.0;
        const double w = wa + u * (wb - wa);
        const double l = std::pow(w, 1.0 / e);
        return right ? 1.0 + l : 1.0 - l;
    }

    double c_, gamma_, lo_, hi_, tilt_;
    bool right_;
    double mass_;
};

} // namespace

ComponentPtr make_power_component(double rate, double exponent, double lo, double hi) {
    return std::make_shared<PowerComponent>(rate, exponent, lo, hi);
}

ComponentPtr make_beta_component(double rate, double alpha, double beta) {
    return std::make_shared<BetaComponent>(rate, alpha, beta);
}

ComponentPtr make_pareto_component(double rate, double alpha, double m0) {
    return std::make_shared<ParetoComponent>(rate, alpha, m0);
}

ComponentPtr make_singular_component(double c, double gamma, double lo, double hi) {
    return std::make_shared<SingularPiece>(c, gamma, lo, hi, 0.0);
}

// ---------------------------------------------------------------------------
// JumpPath

JumpPath::JumpPath(double horizon, double drift, std::vector<Jump> jumps)
    : horizon_(horizon), drift_(drift), jumps_(std::move(jumps)) {
    if (!(horizon > 0.0)) throw std::invalid_argument("JumpPath: horizon must be > 0");
    double prev = 0.0;
    cum_log_.reserve(jumps_.size());
    double acc = 0.0;
    for (const Jump& j : jumps_) {
        if (!(j.time > 0.0) || j.time > horizon_)
            throw std::invalid_argument("JumpPath: jump times must lie in (0, horizon]");
        if (j.time < prev) throw std::invalid_argument("JumpPath: jump times must be increasing");
        prev = j.time;
        acc += j.log_m;
        cum_log_.push_back(acc);
    }
}

double JumpPath::delta_at(double t) const {
    // index of last jump with time <= t
    std::size_t lo = 0, hi = jumps_.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (jumps_[mid].time <= t)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo == 0 ? 0.0 : cum_log_[lo - 1];
}

double JumpPath::value_at(double t) const { return drift_ * t + delta_at(t); }

double JumpPath::integral_exp(double mult, double a, double b, double offset) const {
    // sum over affine segments of int exp(mult * (K_s - offset)) ds
    double total = 0.0;
    double cur_s = a;
    double cur_v = value_at(a) - offset;
    const double g = drift_;
    auto piece = [&](double v0, double d) {
        if (d <= 0.0) return 0.0;
        if (std::abs(g) < 1e-14) return d * std::exp(mult * v0);
        return std::exp(mult * v0) * std::expm1(mult * g * d) / (mult * g);
    };
    // first jump strictly after a
    std::size_t idx = 0;
    {
        std::size_t lo = 0, hi = jumps_.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (jumps_[mid].time <= a)
                lo = mid + 1;
            else
                hi = mid;
        }
        idx = lo;
    }
    while (idx < jumps_.size() && jumps_[idx].time < b) {
        const double tj = jumps_[idx].time;
        total += piece(cur_v, tj - cur_s);
        cur_v += g * (tj - cur_s) + jumps_[idx].log_m;
        cur_s = tj;
        ++idx;
    }
    total += piece(cur_v, b - cur_s);
    return total;
}

double JumpPath::exp_functional(double beta, double t) const {
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("exp_functional: beta must lie in (0, 1]");
    if (t > horizon_ + 1e-12) throw std::out_of_range("exp_functional: t exceeds horizon");
    if (t <= 0.0) return 0.0;
    return integral_exp(-beta, 0.0, std::min(t, horizon_), 0.0);
}

double JumpPath::exp_functional_between(double beta, double a, double b) const {
    if (b > horizon_ + 1e-12 || a < 0.0 || b < a)
        throw std::out_of_range("exp_functional_between: bad interval");
    return integral_exp(-beta, a, std::min(b, horizon_), value_at(a));
}

double JumpPath::exp_integral_general(double mult, double t) const {
    if (t > horizon_ + 1e-12) throw std::out_of_range("exp_integral_general: t exceeds horizon");
    if (mult == 0.0) return t;
    return integral_exp(mult, 0.0, std::min(t, horizon_), 0.0);
}

DiscretizedFunctional JumpPath::discretized_functional(double beta, long p, long q) const {
    if (q < 1 || p < 0) throw std::out_of_range("discretized_functional: need p >= 0, q >= 1");
    const double t = static_cast<double>(p) / static_cast<double>(q);
    if (t > horizon_ + 1e-12) throw std::out_of_range("discretized_functional: p/q beyond horizon");

    DiscretizedFunctional out{0.0, 0.0, 0.0};
    const double g = drift_;
    std::size_t idx = 0; // next jump not yet applied
    double v = 0.0;      // K at current sweep position
    double s = 0.0;
    for (long i = 0; i < p; ++i) {
        const double cell_end = static_cast<double>(i + 1) / static_cast<double>(q);
        out.a_pq += std::exp(-beta * v);
        double mn = v, mx = v;
        while (idx < jumps_.size() && jumps_[idx].time <= cell_end) {
            const double tj = jumps_[idx].time;
            const double v_end = v + g * (tj - s);
            mn = std::min(mn, std::min(v, v_end));
            mx = std::max(mx, std::max(v, v_end));
            v = v_end + jumps_[idx].log_m;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            s = tj;
            ++idx;
        }
        const double v_end = v + g * (cell_end - s);
        mn = std::min(mn, std::min(v, v_end));
        mx = std::max(mx, std::max(v, v_end));
        v = v_end;
        s = cell_end;
        const double w = 1.0 / static_cast<double>(q);
        out.lower += w * std::exp(-beta * mx);
        out.upper += w * std::exp(-beta * mn);
    }
    out.a_pq += std::exp(-beta * v); // i == p term
    return out;
}

JumpPath JumpPath::with_drift(double drift) const { return JumpPath(horizon_, drift, jumps_); }

// ---------------------------------------------------------------------------
// EnvironmentSpec

EnvironmentSpec::EnvironmentSpec(double drift, std::vector<Atom> atoms,
                                 std::vector<ComponentPtr> components)
    : drift_(drift), atoms_(std::move(atoms)), components_(std::move(components)) {
    for (const Atom& a : atoms_) {
        if (!(a.m > 0.0)) throw std::invalid_argument("EnvironmentSpec: atom multiplier must be > 0");
        if (a.m == 1.0)
            throw std::invalid_argument("EnvironmentSpec: atoms at m = 1 are invisible jumps");
        if (!(a.rate > 0.0)) throw std::invalid_argument("EnvironmentSpec: atom rate must be > 0");
        total_rate_ += a.rate;
    }
    for (const ComponentPtr& c : components_) {
        if (!c) throw std::invalid_argument("EnvironmentSpec: null component");
        total_rate_ += c->rate();
        theta_max_ = std::min(theta_max_, c->theta_sup());
    }
    if (!std::isfinite(total_rate_))
        throw std::invalid_argument("EnvironmentSpec: total jump rate must be finite");
}

void EnvironmentSpec::check_lambda(double lam, const char* who) const {
    if (lam < 0.0) throw std::domain_error(std::string(who) + ": lam must be >= 0");
    if (!(lam < theta_max_))
        throw std::domain_error(std::string(who) + ": lam=" + fmt(lam) +
                                " is outside [0, theta_max) with theta_max=" + fmt(theta_max_));
}

double EnvironmentSpec::phi(double lam) const {
    check_lambda(lam, "phi");
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.rate * (std::pow(a.m, lam) - 1.0);
    for (const ComponentPtr& c : components_) s += c->rate() * (c->mellin(lam) - 1.0);
    return s;
}

double EnvironmentSpec::phi_prime(double lam) const {
    check_lambda(lam, "phi_prime");
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.rate * std::pow(a.m, lam) * std::log(a.m);
    for (const ComponentPtr& c : components_) s += c->rate() * c->mellin_log(lam);
    return s;
}

double EnvironmentSpec::phi_K(double lam) const { return drift_ * lam + phi(lam); }

double EnvironmentSpec::phi_K_prime(double lam) const { return drift_ + phi_prime(lam); }

double EnvironmentSpec::log_moment1() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.rate * std::log(a.m);
    for (const ComponentPtr& c : components_) s += c->rate() * c->moment(0.0, 1);
    return s;
}

double EnvironmentSpec::log_moment2() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.rate * std::log(a.m) * std::log(a.m);
    for (const ComponentPtr& c : components_) s += c->rate() * c->moment(0.0, 2);
    return s;
}

EnvironmentSpec EnvironmentSpec::with_drift(double drift) const {
    return EnvironmentSpec(drift, atoms_, components_);
}

EnvironmentSpec EnvironmentSpec::esscher(double lam) const {
    check_lambda(lam, "esscher");
    if (lam == 0.0) return *this;
    std::vector<Atom> atoms;
    atoms.reserve(atoms_.size());
    for (const Atom& a : atoms_) atoms.push_back({a.m, a.rate * std::pow(a.m, lam)});
    std::vector<ComponentPtr> comps;
    comps.reserve(components_.size());
    for (const ComponentPtr& c : components_) comps.push_back(c->tilt(lam));
    return EnvironmentSpec(drift_, std::move(atoms), std::move(comps));
}

JumpPath EnvironmentSpec::sample_path(double horizon, RngStream& rng) const {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_path: horizon must be > 0");
    const double count = poisson(rng, total_rate_ * horizon);
    const std::size_t n = static_cast<std::size_t>(count);
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) times[i] = horizon * rng.uniform01();
    std::sort(times.begin(), times.end());
    std::vector<Jump> jumps;
    jumps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double pick = rng.uniform01() * total_rate_;
        double m = -1.0;
        for (const Atom& a : atoms_) {
            if (pick < a.rate) {
                m = a.m;
                break;
            }
            pick -= a.rate;
        }
        if (m < 0.0) {
            for (std::size_t ci = 0; ci < components_.size(); ++ci) {
                if (pick < components_[ci]->rate() || ci + 1 == components_.size()) {
                    m = components_[ci]->sample(rng);
                    break;
                }
                pick -= components_[ci]->rate();
            }
        }
        if (m < 0.0) m = atoms_.back().m; // pick landed on total_rate_ exactly
        // merge ties so constructed paths keep strictly increasing times
        if (!jumps.empty() && jumps.back().time == times[i])
            jumps.back().log_m += std::log(m);
        else
            jumps.push_back({times[i], std::log(m)});
    }
    return JumpPath(horizon, drift_, std::move(jumps));
}

// ---------------------------------------------------------------------------
// Truncation of a singular density

EnvironmentSpec truncate_singular(double drift, const SingularDensity& density, double eps1,
                                  double eps2) {
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw std::invalid_argument("truncate: need 0 < eps1 < 1");
    if (!(eps2 > 0.0)) throw std::invalid_argument("truncate: need eps2 > 0");
    if (!std::isfinite(density.hi) && !(density.gamma > 1.0))
        throw std::domain_error("truncate: mass on (1+eps2, inf) is infinite for gamma <= 1");
    std::vector<ComponentPtr> comps;
    const double left_hi = std::min(density.hi, 1.0 - eps1);
    if (density.lo < left_hi)
        comps.push_back(make_singular_component(density.c, density.gamma, density.lo, left_hi));
    const double right_lo = std::max(density.lo, 1.0 + eps2);
    if (right_lo < density.hi)
        comps.push_back(make_singular_component(density.c, density.gamma, right_lo, density.hi));
    return EnvironmentSpec(drift, {}, std::move(comps));
}

} // namespace csbp
