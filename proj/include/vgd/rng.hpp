#pragma once

#include <cmath>
#include <cstdint>

namespace vgd {

// PCG32 with explicitly specified uniform/normal transforms, so identical
// seeds give bit-identical streams on every platform and standard-library
// version. All stochastic behaviour in the library goes through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL, std::uint64_t stream = 1)
        : state_(0), inc_((stream << 1u) | 1u) {
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // in [0,1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        double u = uniform();
        int v = lo + static_cast<int>(u * (static_cast<double>(hi) - lo + 1.0));
        return v > hi ? hi : v;
    }

    // Box-Muller, one value per call; two uniform draws consumed
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

} // namespace vgd
