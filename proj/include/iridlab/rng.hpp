#pragma once

#include <cstdint>
#include <limits>

namespace iridlab {

// splitmix64: tiny, fast, seedable generator with a one-word state.
// Used everywhere randomness is needed so that results are identical
// across standard libraries and platforms for a given seed.
constexpr std::uint64_t splitmix64_step(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    constexpr explicit Rng(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next_u64() { return splitmix64_step(state_); }

    constexpr std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

    constexpr std::uint8_t next_byte() { return static_cast<std::uint8_t>(next_u64() >> 56); }

    // Uniform integer in [0, bound). Rejection-free multiply-shift reduction;
    // the modulo bias is below 2^-32 for the bounds used here.
    constexpr std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Uniform double in [0, 1).
    constexpr double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    constexpr bool bernoulli(double p) { return uniform() < p; }

    template <typename It>
    constexpr void fill_bytes(It first, It last) {
        for (; first != last; ++first) *first = next_byte();
    }

    // Derive an independent stream (for parallel work with per-partition seeds).
    constexpr Rng fork(std::uint64_t salt) const {
        std::uint64_t s = state_ ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
        return Rng(splitmix64_step(s));
    }

private:
    std::uint64_t state_;
};

} // namespace iridlab
