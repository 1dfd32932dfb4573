#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "csbp/env.hpp"
#include "csbp/quenched_ode.hpp"
#include "csbp/quenched_stable.hpp"

using namespace csbp;

namespace {

double stable_v0(const StableMechanism& mech, double lam, double t, const JumpPath& path) {
    const double J = mech.c_plus * mech.beta * path.exp_functional(mech.beta, t);
    return std::pow(J + std::pow(lam, -mech.beta), -1.0 / mech.beta);
}

} // namespace

TEST_CASE("backward solve matches the stable closed form") {
    const EnvironmentSpec spec(0.2, {{0.5, 1.0}, {2.0, 0.3}});
    for (double beta : {0.5, 1.0}) {
        const StableMechanism mech{0.2, 1.0, beta};
        for (int i = 0; i < 10; ++i) {
            RngStream rng = RngStream::substream(301, i);
            const JumpPath path = spec.sample_path(20.0, rng);
            for (double t : {1.0, 5.0, 20.0}) {
                for (double lam : {0.1, 1.0, 10.0}) {
                    const double got = solve_backward(mech, lam, t, path, 1e-9).v0;
                    const double want = stable_v0(mech, lam, t, path);
                    CHECK(std::abs(got - want) / want <= 1e-6);
                }
            }
        }
    }
}

TEST_CASE("zero branching part keeps v constant") {
    const GeneralMechanism mech(0.4, 0.0, {});
    const JumpPath path(3.0, 0.4, {{1.2, -0.3}});
    const OdeSolution sol = solve_backward(mech, 2.5, 3.0, path, 1e-10);
    CHECK(sol.v0 == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("small-lam limit: v0/lam -> 1") {
    const GeneralMechanism mech(0.1, 1.0, {{1.0, 0.5}});
    const JumpPath path(2.0, 0.1, {{0.9, std::log(0.5)}});
    double prev_ratio = 0.0;
    for (double lam : {1.0, 0.1, 0.01, 1e-4}) {
        const double v0 = solve_backward(mech, lam, 2.0, path, 1e-11).v0;
        CHECK(v0 <= lam * (1.0 + 1e-9));
        const double ratio = v0 / lam;
        CHECK(ratio >= prev_ratio - 1e-9);
        prev_ratio = ratio;
    }
    CHECK(prev_ratio == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("v0 is strictly increasing in lam") {
    const GeneralMechanism mech(0.2, 0.7, {{0.8, 0.6}});
    const JumpPath path(4.0, 0.2, {{1.0, 0.4}, {2.5, -0.9}});
    double prev = 0.0;
    for (double lam : {0.1, 1.0, 10.0, 100.0, 1e4}) {
        const double v0 = solve_backward(mech, lam, 4.0, path, 1e-10).v0;
        CHECK(v0 > prev);
        prev = v0;
    }
}

TEST_CASE("fixed-step convergence order of the integrator is at least 4") {
    // smooth scalar problem with known solution: v' = v, v(0) = 1
    auto f = [](double, double v) { return v; };
    std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errs;
    for (double h : hs) {
        double v = 1.0;
        double s = 0.0;
        const int n = static_cast<int>(std::round(1.0 / h));
        for (int i = 0; i < n; ++i) {
            v = dopri5_step(f, s, v, h).first;
            s += h;
        }
        errs.push_back(std::abs(v - std::exp(1.0)));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        CHECK(order >= 4.0);
    }
}

TEST_CASE("tolerance is honored against a tight reference") {
    const StableMechanism mech{0.3, 2.0, 0.7};
    const JumpPath path(5.0, 0.3, {{0.6, -0.5}, {3.1, 0.8}});
    const double want = stable_v0(mech, 3.0, 5.0, path);
    for (double tol : {1e-6, 1e-9, 1e-12}) {
        const double got = solve_backward(mech, 3.0, 5.0, path, tol).v0;
        CHECK(std::abs(got - want) <= 100.0 * tol * (1.0 + want));
    }
}

TEST_CASE("stiffness guard: huge lam ladder stays accurate") {
    // long subcritical path pushes exp(-K) v above the switch threshold
    const StableMechanism mech{0.1, 1.0, 1.0};
    const EnvironmentSpec spec(0.1, {{0.5, 1.0}});
    RngStream rng = RngStream::from_seed(404);
    const JumpPath path = spec.sample_path(40.0, rng);
    for (double lam : {1e6, 1e8}) {
        const double got = solve_backward(mech, lam, 40.0, path, 1e-9).v0;
        const double want = stable_v0(mech, lam, 40.0, path);
        CHECK(std::abs(got - want) / want <= 1e-6);
    }
}

TEST_CASE("survival bracket from the lambda ladder") {
    const std::vector<double> ladder = {1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6};
    SUBCASE("stable case contains the closed form") {
        const StableMechanism mech{0.2, 1.0, 1.0};
        const EnvironmentSpec spec(0.2, {{0.5, 0.8}});
        for (int i = 0; i < 5; ++i) {
            RngStream rng = RngStream::substream(37, i);
            const JumpPath path = spec.sample_path(6.0, rng);
            const SurvivalBracket b = survival_general(mech, 1.0, 6.0, path, ladder);
            const double exact = quenched_survival(mech, 1.0, 6.0, path);
            CHECK(b.lower <= exact + 1e-9);
            CHECK(exact <= b.upper + 1e-9);
            CHECK(b.upper - b.lower < 1e-4);
        }
    }
    SUBCASE("zero branching part means certain survival") {
        const GeneralMechanism mech(0.4, 0.0, {});
        const JumpPath path(3.0, 0.4, {});
        const SurvivalBracket b = survival_general(mech, 1.0, 3.0, path, ladder);
        CHECK(b.upper == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.lower > 1.0 - 1e-9);
    }
    SUBCASE("bracket width decreases as the ladder extends") {
        const GeneralMechanism mech(0.1, 1.0, {{1.0, 1.0}});
        const JumpPath path(2.0, 0.1, {{0.8, -0.4}});
        double prev_width = 2.0;
        for (std::size_t k = 3; k <= ladder.size(); ++k) {
            const SurvivalBracket b = survival_general(
                mech, 1.0, 2.0, path, std::span<const double>(ladder.data(), k));
            const double width = b.upper - b.lower;
            CHECK(width <= prev_width + 1e-12);
            prev_width = width;
        }
    }
}

TEST_CASE("closed-form envelopes bracket the general solution") {
    const GeneralMechanism mech(0.1, 1.0, {{1.0, 1.0}});
    const EnvironmentSpec spec(0.1, {{0.5, 1.0}});
    const std::vector<double> ladder = {1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6};
    SUBCASE("mu = 0 collapses to the stable value") {
        const GeneralMechanism pure(0.3, 0.9, {});
        const JumpPath path(2.0, 0.3, {{1.1, -0.2}});
        const SurvivalBracket b = survival_sandwich(pure, 1.0, 2.0, path);
        const StableMechanism feller{0.3, 0.9, 1.0};
        const double exact = quenched_survival(feller, 1.0, 2.0, path);
        CHECK(b.lower == doctest::Approx(exact).epsilon(1e-12));
        CHECK(b.upper == doctest::Approx(exact).epsilon(1e-12));
    }
    SUBCASE("ordering against the ladder bracket on sampled paths") {
        for (int i = 0; i < 10; ++i) {
            RngStream rng = RngStream::substream(91, i);
            const JumpPath path = spec.sample_path(5.0, rng);
            const SurvivalBracket env = survival_sandwich(mech, 1.0, 5.0, path);
            const SurvivalBracket ode = survival_general(mech, 1.0, 5.0, path, ladder);
            CHECK(env.lower <= ode.lower + 1e-7);
            CHECK(ode.upper <= env.upper + 1e-7);
        }
    }
    SUBCASE("envelope gap closes as the jump mass shrinks") {
        const JumpPath path(2.0, 0.1, {{0.9, -0.3}});
        double prev_gap = 2.0;
        for (double scale : {1.0, 0.3, 0.1, 0.01}) {
            const GeneralMechanism m(0.1, 1.0, {{1.0, scale}});
            const SurvivalBracket b = survival_sandwich(m, 1.0, 2.0, path);
            const double gap = b.upper - b.lower;
            CHECK(gap < prev_gap + 1e-12);
            prev_gap = gap;
        }
        CHECK(prev_gap < 2e-3);
    }
}

TEST_CASE("dropping small jumps perturbs the solve proportionally") {
    const StableMechanism mech{0.1, 1.0, 1.0};
    const SingularDensity dens{0.2, 0.5, 0.7, 1.3};
    const double t = 3.0;
    const EnvironmentSpec ref_spec = truncate_singular(0.1, dens, 1e-3, 1e-3);
    RngStream r1 = RngStream::from_seed(1234);
    const JumpPath ref = ref_spec.sample_path(t, r1);
    const double v_ref = solve_backward(mech, 1.0, t, ref, 1e-10).v0;
    double prev_err = 1e9;
    for (double eps : {0.2, 0.1, 0.05, 0.02}) {
        const EnvironmentSpec cut_spec = truncate_singular(0.1, dens, eps, eps);
        std::vector<Jump> kept;
        for (const Jump& j : ref.jumps()) {
            const double m = std::exp(j.log_m);
            if (m < 1.0 - eps || m > 1.0 + eps) kept.push_back(j);
        }
        const double removed_rate =
            ref_spec.total_jump_rate() - cut_spec.total_jump_rate();
        const JumpPath cut(t, 0.1, kept);
        const double v_cut = solve_backward(mech, 1.0, t, cut, 1e-10).v0;
        const double err = std::abs(v_ref - v_cut);
        CHECK(err <= 2.0 * (removed_rate + 1e-3) * t);
        CHECK(err <= prev_err + 1e-9);
        prev_err = err;
    }
}

TEST_CASE("precondition errors") {
    const StableMechanism mech{0.0, 1.0, 1.0};
    const JumpPath path(1.0, 0.0, {});
    CHECK_THROWS_AS(solve_backward(mech, -1.0, 1.0, path, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(solve_backward(mech, 1.0, 2.0, path, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(solve_backward(mech, 1.0, 1.0, path, -1e-9), std::invalid_argument);
}
