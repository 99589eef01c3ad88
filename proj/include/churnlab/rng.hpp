#pragma once

#include <cmath>
#include <cstdint>

namespace churnlab {

inline constexpr double kPi = 3.14159265358979323846;

/*
 * Deterministic random number utilities.
 *
 * Everything that consumes randomness in this library draws from Rng, a
 * splitmix64 stream. std::uniform_int_distribution, std::shuffle and friends
 * are implementation-defined, so bounded draws, shuffles and gaussians are
 * implemented here by hand. Given the same seed the byte stream is identical
 * on every platform.
 */

// Mixing function from the splitmix64 generator (public domain reference
// constants). Also used standalone to derive independent stream seeds.
constexpr std::uint64_t splitmix64_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives the seed for substream `stream` of a master seed. Used wherever
// work is split per item (SMOTE samples, ensemble members, epochs, members
// of a synthetic population) so that results do not depend on visit order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64_mix(seed ^ splitmix64_mix(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform double in [0, 1), 53 bits of precision.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1]; safe to pass to log().
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Unbiased integer in [0, n) by rejection. n must be nonzero.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller without caching: two uniforms per draw, stateless apart
    // from the stream position.
    double gaussian() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Inversion by sequential search; fine for the small means used here.
    int poisson(double mean) {
        const double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        int k = 0;
        while (u >= cdf && k < 1000) {
            ++k;
            p *= mean / k;
            cdf += p;
        }
        return k;
    }

    // Fisher-Yates over [first, last).
    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const std::uint64_t j = below(i);
            auto tmp = first[i - 1];
            first[i - 1] = first[j];
            first[j] = tmp;
        }
    }

private:
    std::uint64_t state_;
};

} // namespace churnlab
