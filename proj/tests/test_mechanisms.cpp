#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csbp/mechanisms.hpp"
#include "csbp/special.hpp"

using namespace csbp;

TEST_CASE("stable mechanism values") {
    const StableMechanism m{1.0, 1.0, 1.0};
    CHECK(m.psi(2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m.psi0(2.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(m.psi0(0.0) == 0.0);
    // beta < 1
    const StableMechanism s{0.3, 2.0, 0.5};
    CHECK(s.psi0(4.0) == doctest::Approx(2.0 * 8.0).epsilon(1e-14));
}

TEST_CASE("general mechanism with atoms") {
    const GeneralMechanism m(0.0, 1.0, {{1.0, 1.0}});
    CHECK(m.psi0(1.0) == doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-13));
    CHECK(m.psi0(0.0) == 0.0);
    CHECK(m.psi(1.0) == m.psi0(1.0)); // g = 0
}

TEST_CASE("psi'(0) equals -g numerically") {
    const GeneralMechanism m(0.7, 0.5, {{0.5, 2.0}, {2.0, 0.1}});
    const double h = 1e-6;
    const double deriv = (m.psi(2.0 * h) - m.psi(h)) / h;
    CHECK(std::abs(deriv - (-0.7)) < 1e-4 * (1.0 + 0.7));
}

TEST_CASE("psi0 is nonnegative and convex") {
    const GeneralMechanism m(0.2, 0.3, {{1.5, 0.8}},
                             MuDensity{MuDensity::Family::exponential, 0.5, 2.0, 0.0});
    for (double a : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double c = a + 1.0;
        CHECK(m.psi0(a) >= 0.0);
        CHECK(2.0 * m.psi0(0.5 * (a + c)) <= m.psi0(a) + m.psi0(c) + 1e-12);
    }
}

TEST_CASE("stable consistency: general with mu = 0 reproduces the Feller values") {
    const GeneralMechanism gen(0.4, 0.9, {});
    const StableMechanism stable{0.4, 0.9, 1.0};
    for (double lam : {0.0, 0.3, 1.0, 7.5}) {
        CHECK(gen.psi(lam) == doctest::Approx(stable.psi(lam)).epsilon(1e-14));
        CHECK(gen.psi0(lam) == doctest::Approx(stable.psi0(lam)).epsilon(1e-14));
    }
}

TEST_CASE("density part matches closed forms") {
    SUBCASE("exponential density") {
        // int (e^{-lam z} - 1 + lam z) theta e^{-theta z} dz = lam^2/(theta(theta+lam))
        const double theta = 2.0, mass = 0.7;
        const GeneralMechanism m(0.0, 0.0, {},
                                 MuDensity{MuDensity::Family::exponential, mass, theta, 0.0});
        for (double lam : {0.2, 1.0, 5.0}) {
            const double want = mass * lam * lam / (theta * (theta + lam));
            CHECK(m.psi0(lam) == doctest::Approx(want).epsilon(1e-9));
        }
        CHECK(m.mu_second_moment() == doctest::Approx(mass * 2.0 / (theta * theta)));
    }
    SUBCASE("uniform density") {
        const double a = 0.5, b = 2.0, mass = 1.3;
        const GeneralMechanism m(0.0, 0.0, {},
                                 MuDensity{MuDensity::Family::uniform, mass, a, b});
        for (double lam : {0.2, 1.0, 5.0}) {
            const double want =
                mass *
                ((std::exp(-lam * a) - std::exp(-lam * b)) / lam - (b - a) +
                 lam * (b * b - a * a) / 2.0) /
                (b - a);
            CHECK(m.psi0(lam) == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("compensated exponential is stable near zero") {
    for (double u : {1e-10, 1e-6, 1e-4, 1e-2, 1.0, 30.0}) {
        const long double lu = u;
        const long double ref = expm1l(-lu) + lu;
        CHECK(compensated_exp(u) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-10));
    }
}

TEST_CASE("quadratic envelopes") {
    SUBCASE("mu = 0 collapses the envelope") {
        const GeneralMechanism m(0.1, 1.0, {});
        const auto [lo, hi] = m.sandwich();
        CHECK(lo.c_plus == doctest::Approx(1.0));
        CHECK(hi.c_plus == doctest::Approx(1.0));
        CHECK(lo.g == 0.1);
    }
    SUBCASE("atom contributes c/2 to the upper diffusion") {
        const GeneralMechanism m(0.0, 1.0, {{1.0, 1.0}});
        const auto [lo, hi] = m.sandwich();
        CHECK(lo.c_plus == doctest::Approx(1.0));
        CHECK(hi.c_plus == doctest::Approx(1.5));
    }
    SUBCASE("pointwise ordering on a grid") {
        const GeneralMechanism m(0.3, 0.8, {{0.7, 0.5}, {2.0, 0.2}},
                                 MuDensity{MuDensity::Family::exponential, 0.4, 1.5, 0.0});
        const auto [lo, hi] = m.sandwich();
        for (double lam = 0.1; lam <= 10.0; lam += 0.3) {
            CHECK(lo.psi(lam) <= m.psi(lam) + 1e-10);
            CHECK(m.psi(lam) <= hi.psi(lam) + 1e-10);
        }
    }
    SUBCASE("rejects sigma2 = 0") {
        const GeneralMechanism m(0.0, 0.0, {{1.0, 1.0}});
        CHECK_THROWS_AS(m.sandwich(), std::domain_error);
    }
}

TEST_CASE("negative lam rejected") {
    const StableMechanism s{0.0, 1.0, 1.0};
    CHECK_THROWS_AS(s.psi0(-1.0), std::domain_error);
    CHECK_THROWS_AS(GeneralMechanism(0.0, 1.0, {}).psi0(-0.5), std::domain_error);
}
