#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qbmrl {

// All stochastic code in this library draws from mt19937_64 seeded through
// splitmix64, with uniforms and gaussians derived by hand. This keeps every
// stream fully specified by the standard, so identical seeds give identical
// results on any platform.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Combines a seed with up to three stream labels into a decorrelated seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(a + 0x100000001b3ull));
    h = splitmix64(h ^ splitmix64(b + 0xcbf29ce484222325ull));
    h = splitmix64(h ^ splitmix64(c + 0x2545f4914f6cdd1dull));
    return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Uniform double in [0, 1) from the top 53 bits.
inline double canonical(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n). Modulo bias is far below any tolerance used here.
inline std::size_t rand_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

// Standard normal variates via Box-Muller, generated in pairs.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(make_rng(seed)) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // 1 - u in (0, 1] so the log is finite.
        const double u1 = 1.0 - canonical(rng_);
        const double u2 = canonical(rng_);
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * M_PI * u2;
        spare_ = mag * std::sin(ang);
        have_spare_ = true;
        return mag * std::cos(ang);
    }

private:
    Rng rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace qbmrl
