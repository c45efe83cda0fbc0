#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "linflow/probit.hpp"

namespace linflow {

// Seeded random source. All distributions are generated from explicit
// bit-level recipes (not std:: distribution objects) so that a given seed
// produces the same stream on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Derives an independent substream from (master seed, run index, label).
    // The label keys the consumer, so adding or removing one consumer never
    // perturbs the draws seen by another.
    static Rng stream(std::uint64_t master_seed, std::uint64_t run, std::string_view label) {
        std::uint64_t h = mix64(master_seed ^ fnv1a(label));
        h = mix64(h + 0x9e3779b97f4a7c15ULL * (run + 1));
        return Rng(h);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal via inverse-cdf of a uniform strictly inside (0, 1).
    double gaussian() {
        double u = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
        return phi_inv(u);
    }

    // Uniform integer in [0, n), unbiased by rejection.
    int uniform_int(int n) {
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    static constexpr std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    // splitmix64 finalizer.
    static constexpr std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
};

}  // namespace linflow
