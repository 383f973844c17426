#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace patrol {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// mt19937_64 engine with hand-rolled distributions. The std:: distribution
// classes are implementation-defined, so every draw here goes through our own
// arithmetic to keep seeded runs reproducible across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1) with 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), n >= 1; rejection sampling, unbiased
    uint64_t uniform_int(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // symmetric uniform in [-bound, bound]
    double uniform_symmetric(double bound) { return (2.0 * uniform() - 1.0) * bound; }

    // standard normal via Box-Muller (no spare caching, two draws per call)
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // independent stream derived from the construction seed, not current state
    Rng child(uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x51ed2701))); }

    Rng child(std::string_view tag) const {
        uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (char c : tag) {
            h ^= static_cast<uint8_t>(c);
            h *= 0x100000001b3ULL;
        }
        return child(h);
    }

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace patrol
