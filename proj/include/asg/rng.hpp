#pragma once

#include <cmath>
#include <cstdint>

namespace asg {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// PCG32 with explicit stream selection. The standard library distributions
// are implementation-defined, so all randomness in the project goes through
// this generator to keep runs bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        state_ = 0u;
        inc_ = (stream << 1u) | 1u;
        nextU32();
        state_ += seed;
        nextU32();
    }

    std::uint32_t nextU32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t nextU64() {
        std::uint64_t hi = nextU32();
        return (hi << 32u) | nextU32();
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(nextU64() >> 11u) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint32_t uniformInt(std::uint32_t n) {
        // Lemire-style rejection-free enough for test scale; use modulo of 64 bits
        // to keep the bias below 2^-32.
        return static_cast<std::uint32_t>(nextU64() % n);
    }

    /// Standard normal via Box-Muller (cosine branch only, no cached state).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Derives an independent child generator. Children with distinct keys are
    /// decorrelated regardless of how much the parent has been consumed.
    Rng fork(std::uint64_t key) const { return Rng(mix64(state_ ^ mix64(key)), mix64(inc_ + key)); }

    /// Named stream derivation: the canonical way to give each (purpose, index)
    /// pair its own deterministic generator.
    static Rng stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
        return Rng(mix64(seed ^ mix64(purpose)), mix64(purpose ^ (index * 0x9E3779B97F4A7C15ULL)) | 1u);
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
};

} // namespace asg
