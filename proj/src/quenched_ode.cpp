#include "csbp/quenched_ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csbp/quenched_stable.hpp"

namespace csbp {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace

std::pair<double, double> dopri5_step(const std::function<double(double, double)>& f, double s,
                                      double v, double h) {
    const double k1 = f(s, v);
    const double k2 = f(s + c2 * h, v + h * a21 * k1);
    const double k3 = f(s + c3 * h, v + h * (a31 * k1 + a32 * k2));
    const double k4 = f(s + c4 * h, v + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(s + c5 * h, v + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(s + h, v + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double v5 = v + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = f(s + h, v5);
    const double err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return {v5, err};
}

namespace {

struct Segment {
    double s_lo;
    double s_hi;
    double delta; // value of the jump part on [s_lo, s_hi)
};

// Integrate one segment backward from s_hi to s_lo in the state L = log v and
// the stretched variable sigma with s = s_hi - (e^sigma - 1) theta. Backward
// from a large terminal value, v collapses within a boundary layer whose
// width can be far below one ulp of s; the stretched variable resolves that
// layer in O(log lambda) steps while plain segments reduce to an ordinary
// adaptive sweep.
void integrate_segment(const std::function<double(double)>& psi0, double g, const Segment& seg,
                       double& v, double sigma_budget, const OdeOptions& opts,
                       OdeSolution& sol) {
    const double tol = opts.tol;
    const double len = seg.s_hi - seg.s_lo;
    if (!(len > 0.0)) return;

    // relative shrink rate of v at segment entry picks the layer width
    const double u_entry = std::exp(std::log(v) - g * seg.s_hi - seg.delta);
    const double rate0 = u_entry > 0.0 ? psi0(u_entry) / u_entry : 0.0;
    const double theta = std::min(len, 1.0 / std::max(rate0, 1.0 / len));
    const double sigma_end = std::log1p(len / theta);

    // dL/dsigma = -theta e^sigma psi0(u)/u, u = exp(L - g s - delta)
    const double base_exponent = g * seg.s_hi + seg.delta;
    auto rhs = [&](double sigma, double L) {
        const double offset = std::expm1(sigma) * theta;
        const double u = std::exp(L - base_exponent + g * offset);
        if (!(u > 0.0)) return 0.0;
        return -theta * std::exp(sigma) * psi0(u) / u;
    };

    double sigma = 0.0;
    double L = std::log(v);
    double h = sigma_end / 16.0;
    const double h_min = 1e-13 * std::max(1.0, sigma_end);
    while (sigma < sigma_end * (1.0 - 1e-15)) {
        h = std::min(h, sigma_end - sigma);
        const auto [next, err] = dopri5_step(rhs, sigma, L, h);
        const double sc = tol * (1.0 + std::abs(L)) * std::max(h / sigma_budget, 1e-6);
        const double ratio = std::abs(err) / sc;
        if (ratio <= 1.0 && std::isfinite(next)) {
            sigma += h;
            L = next;
            sol.err_estimate += std::abs(err);
            ++sol.steps;
            if (opts.keep_trace)
                sol.trace.emplace_back(seg.s_hi - std::expm1(sigma) * theta, std::exp(L));
            const double grow = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::isfinite(next) ? std::clamp(0.9 * std::pow(ratio, -0.2), 0.1, 0.5) : 0.25;
            if (h < h_min)
                throw std::runtime_error(
                    "solve_backward: step size underflow in segment ending at s=" +
                    std::to_string(seg.s_hi) + "; the problem is stiffer than the tolerance");
        }
    }
    v = std::exp(L);
}

} // namespace

OdeSolution solve_backward_psi0(const std::function<double(double)>& psi0, double lam, double t,
                                const JumpPath& path, const OdeOptions& opts) {
    if (!(lam > 0.0)) throw std::invalid_argument("solve_backward: lam must be > 0");
    if (!(t > 0.0) || t > path.horizon() + 1e-12)
        throw std::invalid_argument("solve_backward: t must lie in (0, horizon]");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_backward: tol must be > 0");

    // segments of constant jump part, walked from t down to 0
    std::vector<Segment> segs;
    {
        std::vector<double> cuts;
        for (const Jump& j : path.jumps())
            if (j.time > 0.0 && j.time < t) cuts.push_back(j.time);
        double hi = t;
        for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
            segs.push_back({*it, hi, path.delta_at(*it)});
            hi = *it;
        }
        segs.push_back({0.0, hi, 0.0});
    }

    OdeSolution sol;
    double v = lam;
    if (opts.keep_trace) sol.trace.emplace_back(t, v);
    const double g = path.drift();
    // error budget spread over the stretched length of all segments; ln(2)
    // per segment is the non-stiff floor
    const double sigma_budget = std::max(1.0, 0.7 * static_cast<double>(segs.size()));
    for (const Segment& seg : segs) integrate_segment(psi0, g, seg, v, sigma_budget, opts, sol);
    sol.v0 = v;
    return sol;
}

OdeSolution solve_backward(const StableMechanism& mech, double lam, double t,
                           const JumpPath& path, double tol) {
    OdeOptions opts;
    opts.tol = tol;
    return solve_backward_psi0([&mech](double u) { return mech.psi0(u); }, lam, t, path, opts);
}

OdeSolution solve_backward(const GeneralMechanism& mech, double lam, double t,
                           const JumpPath& path, double tol) {
    OdeOptions opts;
    opts.tol = tol;
    return solve_backward_psi0([&mech](double u) { return mech.psi0(u); }, lam, t, path, opts);
}

namespace {

double survival_from_v(double x0, double v) { return -std::expm1(-x0 * v); }

template <typename Mech>
std::vector<double> ladder_values(const Mech& mech, double t, const JumpPath& path,
                                  std::span<const double> ladder, double tol) {
    if (ladder.size() < 2)
        throw std::invalid_argument("survival_general: need a ladder of at least 2 values");
    std::vector<double> v;
    v.reserve(ladder.size());
    double prev = 0.0;
    for (double lam : ladder) {
        if (!(lam > prev))
            throw std::invalid_argument("survival_general: ladder must be strictly increasing");
        prev = lam;
        v.push_back(solve_backward(mech, lam, t, path, tol).v0);
    }
    return v;
}

} // namespace

SurvivalBracket survival_general(const StableMechanism& mech, double x0, double t,
                                 const JumpPath& path, std::span<const double> lam_ladder,
                                 double tol) {
    const auto v = ladder_values(mech, t, path, lam_ladder, tol);
    const double v_last = v.back();
    const double lam_last = lam_ladder.back();
    // the stable tail is exactly linear in lam^{-beta}, so the limit inverts
    const double base = std::pow(v_last, -mech.beta) - std::pow(lam_last, -mech.beta);
    const double v_inf = base > 0.0 ? std::pow(base, -1.0 / mech.beta)
                                    : std::numeric_limits<double>::infinity();
    SurvivalBracket b;
    b.lower = survival_from_v(x0, v_last);
    b.upper = std::isinf(v_inf) ? 1.0 : survival_from_v(x0, v_inf);
    return b;
}

SurvivalBracket survival_general(const GeneralMechanism& mech, double x0, double t,
                                 const JumpPath& path, std::span<const double> lam_ladder,
                                 double tol) {
    const auto v = ladder_values(mech, t, path, lam_ladder, tol);
    const std::size_t k = v.size();
    double v_inf = v.back();
    const double inc = v[k - 1] - v[k - 2];
    if (inc > 0.0) {
        double tail = inc; // conservative one-increment tail
        if (k >= 3 && v[k - 2] - v[k - 3] > 0.0) {
            const double r = std::clamp(inc / (v[k - 2] - v[k - 3]), 0.0, 0.99);
            tail = inc * r / (1.0 - r) + inc * 1e-3; // geometric tail with slack
            tail = std::max(tail, inc * 1e-6);
        }
        v_inf += tail;
    }
    SurvivalBracket b;
    b.lower = survival_from_v(x0, v.back());
    b.upper = survival_from_v(x0, v_inf);
    return b;
}

SurvivalBracket survival_sandwich(const GeneralMechanism& mech, double x0, double t,
                                  const JumpPath& path) {
    const auto [lo_mech, hi_mech] = mech.sandwich();
    SurvivalBracket b;
    b.lower = quenched_survival(hi_mech, x0, t, path); // larger diffusion dies faster
    b.upper = quenched_survival(lo_mech, x0, t, path);
    return b;
}

} // namespace csbp
