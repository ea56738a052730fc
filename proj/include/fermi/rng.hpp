#pragma once

#include <cstdint>
#include <cmath>

namespace fermi {

// Counter-based generator: the draw at (seed, stream, counter) is a pure
// function of its arguments, so orbit i always sees the same substream no
// matter which thread runs it. Output headers identify it as
// "splitmix64-counter-v1".
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(seed ^ mix(stream ^ 0x9e3779b97f4a7c15ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // true with probability p
    bool bernoulli(double p) { return next_double() < p; }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr const char* kAlgorithmId = "splitmix64-counter-v1";

private:
    std::uint64_t state_;
};

}  // namespace fermi
