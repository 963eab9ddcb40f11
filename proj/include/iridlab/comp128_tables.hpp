#pragma once

#include <array>
#include <cstdint>

#include "iridlab/rng.hpp"

namespace iridlab::comp128 {

// The five butterfly lookup tables. Level j uses a table of 2^(9-j) entries
// whose values fit in (8-j) bits, so five levels compress 8-bit values down
// to the final nibbles.
struct TableSet {
    std::array<std::uint8_t, 512> t0;
    std::array<std::uint8_t, 256> t1;
    std::array<std::uint8_t, 128> t2;
    std::array<std::uint8_t, 64> t3;
    std::array<std::uint8_t, 32> t4;

    constexpr const std::uint8_t* level(unsigned j) const {
        switch (j) {
            case 0: return t0.data();
            case 1: return t1.data();
            case 2: return t2.data();
            case 3: return t3.data();
            default: return t4.data();
        }
    }
};

namespace detail {

// Entry generator for the lab table set. `skew` controls the value
// distribution: the entry is the minimum of `skew` independent uniform
// draws, so skew=1 is uniform and larger values concentrate probability
// mass and therefore raise the table's collision density. T1 uses skew 3,
// which calibrates the narrow-pipe birthday statistics of the butterfly to
// the query counts reported for real-world key extraction (tens of
// thousands of chosen challenges per 128-bit key; measured median 16.6k
// over 200 random keys). All other levels are uniform, which keeps
// deeper-than-level-2 output collisions negligible.
constexpr std::uint8_t lab_entry(std::uint64_t seed, unsigned table, unsigned index,
                                 unsigned skew, std::uint8_t mask) {
    std::uint8_t best = mask;
    for (unsigned d = 0; d < skew; ++d) {
        std::uint64_t s = seed ^ (static_cast<std::uint64_t>(table) << 40)
                               ^ (static_cast<std::uint64_t>(index) << 8) ^ d;
        auto v = static_cast<std::uint8_t>(splitmix64_step(s) & mask);
        if (v < best) best = v;
    }
    return best;
}

constexpr std::uint64_t kLabSeed = 0xA3A85EEDULL;

template <std::size_t N>
constexpr std::array<std::uint8_t, N> make_lab_table(unsigned table, unsigned skew,
                                                     std::uint8_t mask) {
    std::array<std::uint8_t, N> t{};
    for (std::size_t i = 0; i < N; ++i)
        t[i] = lab_entry(kLabSeed, table, static_cast<unsigned>(i), skew, mask);
    return t;
}

} // namespace detail

// Lab table set, generated deterministically from a documented seed.
//
// The historical GSM constants are public but could not be sourced
// verbatim when this tree was assembled, and a from-memory transcription
// of 992 bytes is not trustworthy data. Every algorithmic property of the
// hash (round/level structure, widths, permutation, output packing) is
// independent of the table contents; to obtain the historical algorithm
// bit-for-bit, replace this constant with the published table values.
inline constexpr TableSet kLabTables{
    detail::make_lab_table<512>(0, 1, 0xFF),
    detail::make_lab_table<256>(1, 3, 0x7F),
    detail::make_lab_table<128>(2, 1, 0x3F),
    detail::make_lab_table<64>(3, 1, 0x1F),
    detail::make_lab_table<32>(4, 1, 0x0F),
};

namespace detail {

constexpr bool tables_in_range(const TableSet& t) {
    // t0 entries are full bytes; the narrower levels need explicit checks.
    for (auto v : t.t1)
        if (v > 0x7F) return false;
    for (auto v : t.t2)
        if (v > 0x3F) return false;
    for (auto v : t.t3)
        if (v > 0x1F) return false;
    for (auto v : t.t4)
        if (v > 0x0F) return false;
    return true;
}

static_assert(tables_in_range(kLabTables), "table entries must fit their level width");

} // namespace detail

} // namespace iridlab::comp128
