#pragma once

#include <cstdint>

namespace crimesim {

/// SplitMix64 finalizer; used for seeding and for deriving child seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Child seed for a logical sub-stream (e.g. one lattice row at one step).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// xoshiro256** 1.0 (Blackman & Vigna), seeded through SplitMix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed);

    std::uint64_t next();
    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform();

private:
    std::uint64_t s_[4];
};

/// Deterministic stream of standard normal deviates.
///
/// Algorithm: xoshiro256** uniforms fed to the Marsaglia polar method; the
/// second deviate of each accepted pair is cached and returned next. Uses
/// only +,*,sqrt,log so streams agree across IEEE-754 platforms up to the
/// accuracy of log().
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : uniform_(seed) {}

    double next();
    double uniform() { return uniform_.uniform(); }

private:
    Xoshiro256 uniform_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace crimesim
