#pragma once
// Deterministic RNG with named substreams.  xoshiro256++ seeded via splitmix64
// (both are the published public-domain reference algorithms).  We avoid
// std::*_distribution because their draw sequences are implementation-defined,
// which would break byte-identical reruns across toolchains.
//
// Substreams exist so that, e.g., policy tie-break randomness never perturbs
// the arrival/service draws when comparing policies on the same seed.

#include <cstdint>

namespace swq {

inline uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    Rng() : Rng(0, 0) {}
    // Stream tag keeps substreams decorrelated under a shared master seed.
    Rng(uint64_t seed, uint64_t stream_tag) {
        uint64_t x = seed ^ (0x6a09e667f3bcc909ULL * (stream_tag + 1));
        for (auto& s : s_) s = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits; fixed mapping, toolchain-independent.
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [0, n); n >= 1.  Rejection-free Lemire-style reduction
    // would bias determinism contracts to 128-bit muls; plain rejection is fine.
    uint64_t uniform_int(uint64_t n) {
        uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Categorical draw over cumulative probabilities; returns the first index i
    // with u < cum[i], or n if u falls beyond cum[n-1] (the "exit" residual).
    size_t categorical_residual(const double* cum, size_t n) {
        double u = next_double();
        for (size_t i = 0; i < n; ++i)
            if (u < cum[i]) return i;
        return n;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// Fixed substream tags used by the simulator.
namespace stream {
constexpr uint64_t arrivals = 1;
constexpr uint64_t service = 2;
constexpr uint64_t routing = 3;
constexpr uint64_t tie_break = 4;
}  // namespace stream

// Per-point seeds for sweep grids, derived from the master seed and the
// flattened grid index.  Documented so runs are reproducible externally.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    uint64_t x = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(x);
}

}  // namespace swq
