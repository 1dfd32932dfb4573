#pragma once

// Cell infection application: Feller-diffusion parasites inside a dividing
// cell line. Along a typical lineage divisions arrive at the size-biased rate
// 2r and each division thins the parasite load by a random fraction Theta, so
// the lineage model is a Feller mechanism with a catastrophe measure
// 2r P(Theta in .). The mean number of infected cells is e^{rt} P(Y_t > 0).

#include <cstdint>
#include <string>
#include <vector>

#include "csbp/env.hpp"
#include "csbp/mechanisms.hpp"
#include "csbp/montecarlo.hpp"
#include "csbp/regimes.hpp"

namespace csbp {

struct ThetaLaw {
    enum class Kind { two_point, beta };
    Kind kind = Kind::two_point;
    double theta = 0.5;      // two_point: P(theta) = P(1-theta) = 1/2
    double alpha = 1.0;      // beta parameters
    double beta_param = 1.0;

    double mellin(double lam) const;           // E[Theta^lam]
    double mean_log_inverse() const;           // E[log(1/Theta)]
    double mean_theta_log_inverse() const;     // E[Theta log(1/Theta)]
};

struct CellModel {
    double g = 0.0;      // parasite growth rate
    double sigma2 = 1.0; // parasite diffusion
    double r = 1.0;      // cell division rate
    ThetaLaw theta;
};

// The induced (environment, mechanism) pair for the lineage process. With
// `size_biased` false the division rate is r instead of 2r; that variant is a
// sensitivity knob only and does not describe typical lineages.
std::pair<EnvironmentSpec, StableMechanism> to_environment(const CellModel& model,
                                                           bool size_biased = true);

struct InfectedRegimeReport {
    RegimeLabel label;
    double growth_exponent = 0.0; // E[N*_t] ~ c t^{-poly} exp(growth * t)
    double poly_exponent = 0.0;
    double alpha = 0.0;           // min over [0,1] of g lam + 2r (E[Theta^lam] - 1/2)
    std::string form;             // human-readable asymptotic form
};

InfectedRegimeReport infected_regime(const CellModel& model);

struct PhaseCell {
    double theta;
    double g_over_r;
    RegimeLabel label;
    double boundary_supercritical; // -log(theta (1-theta))
    double boundary_strong_weak;   // -theta log theta - (1-theta) log(1-theta)
};

// Symmetric two-point sharing: one row per (theta, g/r) grid cell.
std::vector<PhaseCell> phase_diagram(const std::vector<double>& theta_grid,
                                     const std::vector<double>& g_over_r_grid);

struct MeanInfectedEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    double t = 0.0;
    std::size_t n = 0;
};

MeanInfectedEstimate mean_infected(const CellModel& model, double t, std::size_t n,
                                   std::uint64_t seed, int workers = 1);

} // namespace csbp
