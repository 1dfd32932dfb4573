#pragma once

// Deterministic random number streams for Monte Carlo work.
//
// Every sampled object (environment path, branching draw, ...) is tied to a
// substream derived from (master seed, task index), so results are bit-exact
// regardless of how tasks are distributed over worker threads. Samplers are
// implemented here rather than through <random> distributions so that output
// sequences do not depend on the standard library version.

#include <array>
#include <cmath>
#include <cstdint>

namespace csbp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with Box-Muller cache for normals.
class RngStream {
  public:
    static RngStream from_seed(std::uint64_t seed) {
        RngStream r;
        std::uint64_t sm = seed;
        for (auto& w : r.state_) w = splitmix64(sm);
        return r;
    }

    // Substream `index` of a master seed. Streams for distinct indices are
    // statistically independent; this is what makes path i reproducible no
    // matter which worker runs it.
    static RngStream substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t sm = seed;
        std::uint64_t a = splitmix64(sm);
        std::uint64_t mix = a ^ (0x9E3779B97F4A7C15ULL * (index + 1));
        return from_seed(mix);
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe for log().
    double uniform01_pos() { return 1.0 - uniform01(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01_pos()));
        const double theta = 6.283185307179586476925286766559 * uniform01();
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    double exponential() { return -std::log(uniform01_pos()); }

  private:
    std::array<std::uint64_t, 4> state_{1, 2, 3, 4};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

namespace detail {

// Hormann's transformed rejection (PTRS), valid for mean >= 10.
inline double poisson_ptrs(RngStream& rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform01() - 0.5;
        const double v = rng.uniform01();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            k * loglam - mean - std::lgamma(k + 1.0))
            return k;
    }
}

} // namespace detail

// Poisson draw, returned as double so that very large counts survive.
inline double poisson(RngStream& rng, double mean) {
    if (!(mean >= 0.0)) return 0.0;
    if (mean == 0.0) return 0.0;
    if (mean < 10.0) {
        const double limit = std::exp(-mean);
        double p = 1.0;
        double k = -1.0;
        do {
            k += 1.0;
            p *= rng.uniform01_pos();
        } while (p > limit);
        return k;
    }
    if (mean <= 1e9) return detail::poisson_ptrs(rng, mean);
    // Gaussian limit; relative error O(mean^{-1/2}) is below double noise here.
    const double k = std::floor(mean + std::sqrt(mean) * rng.normal() + 0.5);
    return k > 0.0 ? k : 0.0;
}

// Marsaglia-Tsang for shape >= 1.
inline double gamma_draw(RngStream& rng, double shape, double scale) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform01_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

// Beta(a, b) via two gamma draws; requires a, b >= 1.
inline double beta_draw(RngStream& rng, double a, double b) {
    const double x = gamma_draw(rng, a, 1.0);
    const double y = gamma_draw(rng, b, 1.0);
    return x / (x + y);
}

} // namespace csbp
