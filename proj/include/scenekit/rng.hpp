#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "scenekit/csv.hpp"

namespace scenekit::rng {

// splitmix64, used only to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256++. Fixed bit-for-bit output for a given seed on every platform,
// which is what keeps generated datasets reproducible. Entity-level
// substreams are derived by hashing a label into the seed, so per-entity
// draws do not depend on generation order.
class Generator {
public:
    explicit Generator(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    static Generator substream(std::uint64_t seed, std::string_view label) {
        std::uint64_t mixed = seed ^ (csv::fnv1a64(label) * 0x9e3779b97f4a7c15ull);
        return Generator(mixed);
    }

    std::uint64_t next() {
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

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t threshold = (0 - n) % n;
        while (true) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Box-Muller; the spare draw is cached so consecutive calls consume
    // the underlying stream deterministically.
    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(theta);
        have_spare_ = true;
        return mean + sd * radius * std::cos(theta);
    }

    // Knuth's product method; fine for the small rates used here.
    long long poisson(double rate) {
        if (rate <= 0.0) return 0;
        double limit = std::exp(-rate);
        long long count = -1;
        double product = 1.0;
        do {
            ++count;
            product *= uniform();
        } while (product > limit);
        return count;
    }

    double exponential(double rate) {
        double u = 0.0;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -std::log(u) / rate;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace scenekit::rng
