#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qbtc {

// splitmix64 step; used for seed expansion and stream derivation.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** with splitmix64 seeding. Every randomized operation in the
// library draws from this generator, so a run is a pure function of its
// seed on any platform or compiler. std::* distributions are avoided on
// purpose: their output is implementation-defined.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : state_)
            word = splitmix64(sm);
    }

    // Independent stream for (seed, stream); used to split Monte Carlo
    // trials and miners without coupling their draw counts.
    static Rng from_stream(uint64_t seed, uint64_t stream) {
        uint64_t sm = seed;
        uint64_t a = splitmix64(sm);
        sm = a ^ (stream + 0x9e3779b97f4a7c15ULL);
        uint64_t b = splitmix64(sm);
        return Rng(b);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Top `nbits` of a draw, 0 <= nbits <= 32.
    uint32_t bits(int nbits) {
        if (nbits <= 0)
            return 0;
        return static_cast<uint32_t>(next_u64() >> (64 - nbits));
    }

    // Unbiased integer in [0, bound).
    uint64_t below(uint64_t bound) {
        if (bound <= 1)
            return 0;
        const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                               std::numeric_limits<uint64_t>::max() % bound;
        uint64_t x = next_u64();
        while (x >= limit)
            x = next_u64();
        return x % bound;
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_{};
};

} // namespace qbtc
