#pragma once

// Branching mechanisms: the cumulant functions psi and psi0 that drive the
// backward equation for the conditional Laplace exponent.

#include <optional>
#include <utility>
#include <vector>

namespace csbp {

// psi(lam) = -g lam + c_plus lam^{1+beta}, beta in (0,1].
// beta = 1 is the Feller diffusion with sigma^2 = c_plus.
struct StableMechanism {
    double g = 0.0;
    double c_plus = 1.0;
    double beta = 1.0;

    double psi(double lam) const;
    double psi0(double lam) const; // c_plus lam^{1+beta}
};

struct MuAtom {
    double z;    // jump size, > 0
    double rate; // mass, > 0
};

// Bounded-density part of the reproduction measure.
struct MuDensity {
    enum class Family { exponential, uniform };
    Family family = Family::exponential;
    double mass = 0.0; // total mass
    double p1 = 1.0;   // exponential: rate theta; uniform: lower endpoint
    double p2 = 0.0;   // uniform: upper endpoint

    double pdf(double z) const;           // normalized density
    double upper_cutoff() const;          // effective upper integration limit
    double lower() const;                 // support lower endpoint
    double second_moment() const;         // int z^2 under the normalized law
};

// psi(lam) = -g lam + sigma^2 lam^2 + int (e^{-lam z} - 1 + lam z) mu(dz),
// with the integral evaluated in closed form for atoms and by adaptive
// quadrature for the density part.
class GeneralMechanism {
  public:
    GeneralMechanism(double g, double sigma2, std::vector<MuAtom> atoms = {},
                     std::optional<MuDensity> density = std::nullopt);

    double g() const { return g_; }
    double sigma2() const { return sigma2_; }
    const std::vector<MuAtom>& mu_atoms() const { return atoms_; }
    const std::optional<MuDensity>& mu_density() const { return density_; }

    double psi(double lam) const;
    double psi0(double lam) const;

    double mu_second_moment() const; // int z^2 mu(dz)

    // Quadratic envelopes with the same linear part: Feller mechanisms with
    // diffusion sigma^2 (lower) and sigma^2 + c/2 (upper), c = int z^2 mu(dz).
    // psi_minus <= psi <= psi_plus pointwise.
    std::pair<StableMechanism, StableMechanism> sandwich() const;

  private:
    double jump_part(double lam) const;

    double g_;
    double sigma2_;
    std::vector<MuAtom> atoms_;
    std::optional<MuDensity> density_;
};

// e^{-u} - 1 + u evaluated without cancellation for small u.
double compensated_exp(double u);

} // namespace csbp
