#pragma once

#include <cstdint>

namespace cotlab {

// SplitMix64 (Steele, Lea, Flood 2014). Constants:
//   increment  0x9E3779B97F4A7C15
//   mix        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//              z =  z ^ (z >> 31)
std::uint64_t mix64(std::uint64_t z);

// Seed of an independent sub-stream, e.g. one per sample or shard.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    // Uniform in [0, n), rejection sampled so every residue is equally likely.
    std::uint64_t below(std::uint64_t n);
    // Uniform in [lo, hi].
    std::int64_t range(std::int64_t lo, std::int64_t hi);
    // Uniform double in [0, 1) from the top 53 bits.
    double unit();
    bool bernoulli(double prob) { return unit() < prob; }

    Rng split(std::uint64_t stream) const { return Rng(derive_seed(state_, stream)); }
    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace cotlab
