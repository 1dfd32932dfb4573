#include "csbp/mechanisms.hpp"

#include <cmath>
#include <stdexcept>

#include "csbp/special.hpp"

namespace csbp {

double compensated_exp(double u) {
    if (u < 1e-4) return u * u * (0.5 - u * (1.0 / 6.0 - u / 24.0));
    return std::expm1(-u) + u;
}

double StableMechanism::psi(double lam) const { return -g * lam + psi0(lam); }

double StableMechanism::psi0(double lam) const {
    if (lam < 0.0) throw std::domain_error("psi0: lam must be >= 0");
    return c_plus * std::pow(lam, 1.0 + beta);
}

double MuDensity::pdf(double z) const {
    switch (family) {
        case Family::exponential: return p1 * std::exp(-p1 * z);
        default: return (z >= p1 && z <= p2) ? 1.0 / (p2 - p1) : 0.0;
    }
}

double MuDensity::lower() const {
    return family == Family::exponential ? 0.0 : p1;
}

double MuDensity::upper_cutoff() const {
    // exponential tail below double noise past ~46 mean lifetimes
    return family == Family::exponential ? 46.0 / p1 : p2;
}

double MuDensity::second_moment() const {
    switch (family) {
        case Family::exponential: return 2.0 / (p1 * p1);
        default: return (p2 * p2 * p2 - p1 * p1 * p1) / (3.0 * (p2 - p1));
    }
}

GeneralMechanism::GeneralMechanism(double g, double sigma2, std::vector<MuAtom> atoms,
                                   std::optional<MuDensity> density)
    : g_(g), sigma2_(sigma2), atoms_(std::move(atoms)), density_(std::move(density)) {
    if (sigma2_ < 0.0) throw std::invalid_argument("GeneralMechanism: sigma2 must be >= 0");
    for (const MuAtom& a : atoms_) {
        if (!(a.z > 0.0 && a.rate > 0.0))
            throw std::invalid_argument("GeneralMechanism: mu atoms need z > 0, rate > 0");
    }
    if (density_) {
        if (!(density_->mass > 0.0))
            throw std::invalid_argument("GeneralMechanism: density mass must be > 0");
        if (density_->family == MuDensity::Family::exponential && !(density_->p1 > 0.0))
            throw std::invalid_argument("GeneralMechanism: exponential density needs rate > 0");
        if (density_->family == MuDensity::Family::uniform &&
            !(0.0 <= density_->p1 && density_->p1 < density_->p2))
            throw std::invalid_argument("GeneralMechanism: uniform density needs 0 <= a < b");
    }
}

double GeneralMechanism::jump_part(double lam) const {
    double s = 0.0;
    for (const MuAtom& a : atoms_) s += a.rate * compensated_exp(lam * a.z);
    if (density_) {
        const MuDensity& d = *density_;
        s += d.mass * integrate([&](double z) { return compensated_exp(lam * z) * d.pdf(z); },
                                d.lower(), d.upper_cutoff(), 1e-10);
    }
    return s;
}

double GeneralMechanism::psi0(double lam) const {
    if (lam < 0.0) throw std::domain_error("psi0: lam must be >= 0");
    if (lam == 0.0) return 0.0;
    return sigma2_ * lam * lam + jump_part(lam);
}

double GeneralMechanism::psi(double lam) const { return -g_ * lam + psi0(lam); }

double GeneralMechanism::mu_second_moment() const {
    double c = 0.0;
    for (const MuAtom& a : atoms_) c += a.rate * a.z * a.z;
    if (density_) c += density_->mass * density_->second_moment();
    return c;
}

std::pair<StableMechanism, StableMechanism> GeneralMechanism::sandwich() const {
    if (!(sigma2_ > 0.0))
        throw std::domain_error("sandwich: requires sigma2 > 0");
    const double c = mu_second_moment();
    if (!std::isfinite(c)) throw std::domain_error("sandwich: infinite second moment of mu");
    StableMechanism lo{g_, sigma2_, 1.0};
    StableMechanism hi{g_, sigma2_ + 0.5 * c, 1.0};
    return {lo, hi};
}

} // namespace csbp
