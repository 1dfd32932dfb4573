#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "csbp/regimes.hpp"
#include "csbp/rng.hpp"

using namespace csbp;

namespace {

EnvironmentSpec half_atom(double rate = 1.0) { return EnvironmentSpec(0.0, {{0.5, rate}}); }

} // namespace

TEST_CASE("classification of the halving-atom family") {
    SUBCASE("strongly subcritical at g = 0.1") {
        const RegimeReport r = classify(half_atom(), 0.1);
        CHECK(r.label == RegimeLabel::StronglySubcritical);
        CHECK(r.exp_rate == doctest::Approx(-0.4).epsilon(1e-12));
        CHECK(r.poly_exponent == 0.0);
    }
    SUBCASE("intermediate at g = ln2/2") {
        const RegimeReport r = classify(half_atom(), std::log(2.0) / 2.0);
        CHECK(r.label == RegimeLabel::IntermediateSubcritical);
        CHECK(r.exp_rate == doctest::Approx(std::log(2.0) / 2.0 - 0.5).epsilon(1e-12));
        CHECK(r.poly_exponent == 0.5);
    }
    SUBCASE("weakly subcritical at g = 0.5") {
        const RegimeReport r = classify(half_atom(), 0.5);
        CHECK(r.label == RegimeLabel::WeaklySubcritical);
        REQUIRE(r.tau.has_value());
        CHECK(*r.tau == doctest::Approx(0.47123362705510227).epsilon(1e-9));
        CHECK(r.exp_rate == doctest::Approx(-0.043035666).epsilon(1e-6));
        CHECK(r.poly_exponent == 1.5);
    }
    SUBCASE("critical at g = ln2") {
        const RegimeReport r = classify(half_atom(), std::log(2.0));
        CHECK(r.label == RegimeLabel::Critical);
        CHECK(r.exp_rate == 0.0);
        CHECK(r.poly_exponent == 0.5);
    }
    SUBCASE("supercritical at g = 1.2") {
        const RegimeReport r = classify(half_atom(), 1.2);
        CHECK(r.label == RegimeLabel::Supercritical);
        CHECK(r.exp_rate == 0.0);
        CHECK(r.poly_exponent == 0.0);
    }
}

TEST_CASE("critical detection for a constructed boundary case") {
    // g chosen so that phi_K'(0) vanishes exactly in double arithmetic
    const EnvironmentSpec spec(0.0, {{0.5, 0.7}, {2.0, 0.2}});
    const double g = -spec.phi_prime(0.0);
    CHECK(classify(spec, g).label == RegimeLabel::Critical);
}

TEST_CASE("classification is invariant under a change of time units") {
    for (double c : {0.5, 2.0, 7.0}) {
        const EnvironmentSpec spec(0.0, {{0.5, c}});
        const RegimeReport r = classify(spec, 0.5 * c);
        CHECK(r.label == RegimeLabel::WeaklySubcritical);
        CHECK(*r.tau == doctest::Approx(0.47123362705510227).epsilon(1e-9));
        CHECK(r.exp_rate == doctest::Approx(c * -0.04303566602796716).epsilon(1e-9));
        CHECK(r.poly_exponent == 1.5);
    }
}

TEST_CASE("rate ordering in the weak regime") {
    const EnvironmentSpec spec = half_atom();
    for (double g : {0.4, 0.5, 0.6}) {
        const RegimeReport r = classify(spec, g);
        REQUIRE(r.label == RegimeLabel::WeaklySubcritical);
        CHECK(r.exp_rate < g + spec.phi(1.0) - 1e-12);
    }
}

TEST_CASE("interior minimizer location") {
    SUBCASE("m <-> 1/m symmetric atoms with zero drift give tau = 1/2") {
        CHECK(find_tau(EnvironmentSpec(0.0, {{0.25, 1.0}, {4.0, 1.0}}), 0.0) ==
              doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("halving atom at g = 0.5") {
        CHECK(find_tau(half_atom(), 0.5) ==
              doctest::Approx(0.47123362705510227).epsilon(1e-6));
    }
    SUBCASE("scale invariance") {
        for (double c : {1.0, 3.0, 11.0}) {
            CHECK(find_tau(EnvironmentSpec(0.0, {{0.5, c}}), 0.5 * c) ==
                  doctest::Approx(0.47123362705510227).epsilon(1e-9));
        }
    }
    SUBCASE("sign preconditions") {
        CHECK_THROWS_AS(find_tau(half_atom(), 0.1), std::domain_error);
        CHECK_THROWS_AS(find_tau(half_atom(), 1.0), std::domain_error);
    }
}

TEST_CASE("theta_max preconditions are enforced per branch") {
    // pareto tail with theta_max = 0.8: too small for any subcritical branch
    std::vector<ComponentPtr> comps = {make_pareto_component(0.5, 0.8, 1.5)};
    const EnvironmentSpec thin(0.0, {{0.5, 1.0}}, comps);
    CHECK(thin.theta_max() == doctest::Approx(0.8));
    CHECK_THROWS_AS(classify(thin, 0.1), std::domain_error);
    // critical branch with beta = 0.5 works (needs theta_max > 0.5)
    const double g_crit = -thin.phi_prime(0.0);
    CHECK(classify(thin, g_crit, 0.5).label == RegimeLabel::Critical);
    CHECK_THROWS_AS(classify(thin, g_crit, 0.9), std::domain_error);
    // weak branch needs theta_max > beta + 1
    std::vector<ComponentPtr> mid = {make_pareto_component(0.05, 1.3, 1.1)};
    const EnvironmentSpec spec13(0.0, {{0.5, 1.0}}, mid);
    CHECK_THROWS_AS(classify(spec13, 0.5, 0.5), std::domain_error);
}

TEST_CASE("rate regression harness") {
    SUBCASE("exact exponential series") {
        std::vector<RatePoint> pts;
        for (double t = 5.0; t <= 40.0; t += 5.0) pts.push_back({t, 3.0 * std::exp(-0.4 * t), 0.0});
        const RateFit fit = fit_rate(pts);
        CHECK(fit.rho_hat == doctest::Approx(-0.4).epsilon(1e-10));
        CHECK(fit.kappa_hat == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
        CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("exact polynomial series") {
        std::vector<RatePoint> pts;
        for (double t = 5.0; t <= 40.0; t += 5.0) pts.push_back({t, std::pow(t, -0.5), 0.0});
        const RateFit fit = fit_rate(pts);
        CHECK(fit.kappa_hat == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(fit.rho_hat == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    }
    SUBCASE("noisy mixed series") {
        RngStream rng = RngStream::from_seed(2026);
        std::vector<RatePoint> pts;
        for (double t = 20.0; t <= 200.0; t += 20.0) {
            const double exact = 5.0 * std::pow(t, -1.5) * std::exp(-0.043 * t);
            const double noisy = exact * (1.0 + 0.01 * rng.normal());
            pts.push_back({t, noisy, 0.01 * exact});
        }
        const RateFit fit = fit_rate(pts);
        CHECK(std::abs(fit.rho_hat - (-0.043)) < 0.1 * 0.043);
        CHECK(std::abs(fit.kappa_hat - 1.5) < 0.3);
    }
    SUBCASE("nonpositive estimates dropped; too few left is an error") {
        std::vector<RatePoint> pts;
        for (double t = 1.0; t <= 6.0; t += 1.0) pts.push_back({t, t < 4.0 ? 1.0 : 0.0, 0.0});
        CHECK_THROWS_AS(fit_rate(pts), std::invalid_argument);
    }
    SUBCASE("needs at least six points") {
        std::vector<RatePoint> pts(5, RatePoint{1.0, 1.0, 0.0});
        CHECK_THROWS_AS(fit_rate(pts), std::invalid_argument);
    }
}
