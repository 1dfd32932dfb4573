#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "csbp/env.hpp"
#include "csbp/quenched_stable.hpp"
#include "csbp/stats.hpp"

using namespace csbp;

namespace {

const StableMechanism kFeller{0.0, 1.0, 1.0};

JumpPath one_jump_path() { return JumpPath(2.0, 0.0, {{1.0, std::log(0.5)}}); }

} // namespace

TEST_CASE("conditional survival closed form") {
    SUBCASE("no catastrophes, critical Feller") {
        const JumpPath flat(1.0, 0.0, {});
        CHECK(quenched_survival(kFeller, 1.0, 1.0, flat) ==
              doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    }
    SUBCASE("survival tends to 1 as t -> 0") {
        const JumpPath flat(1.0, 0.0, {});
        double prev = 0.0;
        for (double t : {1.0, 0.1, 0.01, 1e-4, 1e-8}) {
            const double s = quenched_survival(kFeller, 1.0, t, flat);
            CHECK(s >= prev);
            prev = s;
        }
        CHECK(prev == 1.0);
    }
    SUBCASE("one halving jump") {
        CHECK(quenched_survival(kFeller, 1.0, 2.0, one_jump_path()) ==
              doctest::Approx(1.0 - std::exp(-1.0 / 3.0)).epsilon(1e-12));
    }
    SUBCASE("drift mismatch rejected") {
        const StableMechanism other{0.5, 1.0, 1.0};
        const JumpPath flat(1.0, 0.0, {});
        CHECK_THROWS_AS(quenched_survival(other, 1.0, 1.0, flat), std::invalid_argument);
    }
}

TEST_CASE("conditional laplace transform") {
    const JumpPath flat(1.0, 0.0, {});
    SUBCASE("value 1 at lam = 0") {
        CHECK(quenched_laplace(kFeller, 1.0, 0.0, 1.0, flat) == 1.0);
    }
    SUBCASE("critical Feller at lam = 1") {
        CHECK(quenched_laplace(kFeller, 1.0, 1.0, 1.0, flat) ==
              doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    }
    SUBCASE("large-lam limit recovers the absorption probability") {
        const double absorbed = 1.0 - quenched_survival(kFeller, 1.0, 2.0, one_jump_path());
        CHECK(quenched_laplace(kFeller, 1.0, 1e13, 2.0, one_jump_path()) ==
              doctest::Approx(absorbed).epsilon(1e-10));
    }
    SUBCASE("monotone decreasing and completely monotone on a grid") {
        std::vector<double> vals;
        for (double lam = 0.5; lam < 40.0; lam *= 1.3)
            vals.push_back(quenched_laplace(kFeller, 1.0, lam, 2.0, one_jump_path()));
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) CHECK(vals[i + 1] < vals[i]);
        // second differences of a completely monotone function are positive
        for (std::size_t i = 0; i + 2 < vals.size(); ++i)
            CHECK(vals[i] - 2.0 * vals[i + 1] + vals[i + 2] > 0.0);
    }
}

TEST_CASE("absorption estimate over a long horizon") {
    SUBCASE("drifting up: closed form exp(-x0 g / c_plus)") {
        const StableMechanism mech{0.5, 1.0, 1.0};
        const JumpPath flat(2000.0, 0.5, {});
        const auto est = absorption_limit(mech, 1.0, flat);
        CHECK(est.absorption_prob == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
        CHECK(est.tail_bound == doctest::Approx(std::exp(-0.5 * 2000.0) / 0.5).epsilon(1e-9));
    }
    SUBCASE("monotone increasing in the horizon") {
        const StableMechanism mech{0.5, 1.0, 1.0};
        double prev = 0.0;
        for (double T : {1.0, 5.0, 50.0, 500.0}) {
            const JumpPath flat(T, 0.5, {});
            const double a = absorption_limit(mech, 1.0, flat).absorption_prob;
            CHECK(a >= prev);
            prev = a;
        }
    }
    SUBCASE("x0 -> infinity pushes absorption to 0") {
        const StableMechanism mech{0.5, 1.0, 1.0};
        const JumpPath flat(100.0, 0.5, {});
        CHECK(absorption_limit(mech, 1e8, flat).absorption_prob ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("exact Feller transitions on a fixed path") {
    const JumpPath path(4.0, 0.1, {{0.7, std::log(0.5)}, {2.1, std::log(2.0)}});
    const StableMechanism mech{0.1, 1.0, 1.0};
    const double x0 = 1.0, t = 3.0;
    const std::size_t n = 100000;

    SUBCASE("absorption frequency matches the closed form") {
        std::vector<double> dead(n), alive_mean(n);
        const double grid[1] = {t};
        for (std::size_t i = 0; i < n; ++i) {
            RngStream rng = RngStream::substream(77, i);
            const auto y = sample_feller_grid(mech, x0, grid, path, rng);
            dead[i] = y[0] == 0.0 ? 1.0 : 0.0;
            alive_mean[i] = y[0];
        }
        const SampleSummary sd = summarize(dead);
        const double want_dead = 1.0 - quenched_survival(mech, x0, t, path);
        CHECK(std::abs(sd.mean - want_dead) < 3.0 * sd.stderr_);

        const SampleSummary sm = summarize(alive_mean);
        const double want_mean = x0 * std::exp(path.value_at(t));
        CHECK(std::abs(sm.mean - want_mean) < 3.0 * sm.stderr_);
    }

    SUBCASE("laplace transform of the sampled state matches the formula") {
        for (double lam : {0.5, 2.0}) {
            std::vector<double> vals(n);
            const double grid[1] = {t};
            const double scale = std::exp(-path.value_at(t));
            for (std::size_t i = 0; i < n; ++i) {
                RngStream rng = RngStream::substream(78, i);
                const auto y = sample_feller_grid(mech, x0, grid, path, rng);
                vals[i] = std::exp(-lam * scale * y[0]);
            }
            const SampleSummary s = summarize(vals);
            CHECK(std::abs(s.mean - quenched_laplace(mech, x0, lam, t, path)) <
                  3.0 * s.stderr_);
        }
    }

    SUBCASE("zero-length interval leaves the state unchanged") {
        const double grid[3] = {1.0, 1.0, 2.0};
        RngStream rng = RngStream::from_seed(3);
        const auto y = sample_feller_grid(mech, x0, grid, path, rng);
        CHECK(y[0] == y[1]);
    }

    SUBCASE("one step and two half steps give the same law") {
        std::vector<double> one(10000), two(10000);
        const double g1[1] = {t};
        const double g2[2] = {0.5 * t, t};
        for (std::size_t i = 0; i < one.size(); ++i) {
            RngStream r1 = RngStream::substream(81, i);
            one[i] = sample_feller_grid(mech, x0, g1, path, r1)[0];
            RngStream r2 = RngStream::substream(82, i);
            two[i] = sample_feller_grid(mech, x0, g2, path, r2)[1];
        }
        CHECK(ks_two_sample(one, two) < 0.05);
    }

    SUBCASE("beta != 1 unsupported") {
        const StableMechanism frac{0.1, 1.0, 0.5};
        const double grid[1] = {1.0};
        RngStream rng = RngStream::from_seed(9);
        CHECK_THROWS_AS(sample_feller_grid(frac, x0, grid, path, rng), std::invalid_argument);
    }
}

TEST_CASE("annealed mean over environments matches x0 exp(t phi_K(1))") {
    const EnvironmentSpec spec(0.1, {{0.5, 1.0}});
    const StableMechanism mech{0.1, 1.0, 1.0};
    const double t = 5.0, x0 = 1.0;
    const std::size_t n = 200000;
    std::vector<double> vals(n);
    const double grid[1] = {t};
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = RngStream::substream(99, i);
        const JumpPath path = spec.sample_path(t, rng);
        vals[i] = sample_feller_grid(mech, x0, grid, path, rng)[0];
    }
    const SampleSummary s = summarize(vals);
    CHECK(std::abs(s.mean - x0 * std::exp(t * spec.phi_K(1.0))) < 3.0 * s.stderr_);
}
