#pragma once

#include <cmath>
#include <cstdint>

namespace tclfreq {

// Deterministic stream RNG (splitmix64). Same seed -> same sequence on every
// platform; used everywhere randomness is needed so runs are reproducible
// bit-for-bit regardless of the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Standard normal via Box-Muller; second value cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 1e-300) {
            u1 = uniform01();
        }
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Derives an independent stream seed from a base seed and a tag, so that
// populations, threshold draws and draw profiles never share a stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    Rng mix(base ^ (0x7f4a7c15ULL + tag * 0x9e3779b97f4a7c15ULL));
    mix.next_u64();
    return mix.next_u64();
}

} // namespace tclfreq
