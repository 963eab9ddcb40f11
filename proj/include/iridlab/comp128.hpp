#pragma once

#include <array>
#include <cstdint>
#include <cstring>

#include "iridlab/comp128_tables.hpp"
#include "iridlab/errors.hpp"

namespace iridlab::comp128 {

// 128-bit subscriber secret key (Ki).
struct SecretKey {
    std::array<std::uint8_t, 16> ki{};

    friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

// 128-bit authentication challenge (RAND).
struct Challenge {
    std::array<std::uint8_t, 16> rand{};

    friend bool operator==(const Challenge&, const Challenge&) = default;
};

// A3/A8 output: 32-bit signed response and 64-bit session key. The low 10
// bits of kc are structurally zero, leaving 54 effective key bits.
struct AuthResult {
    std::array<std::uint8_t, 4> sres{};
    std::array<std::uint8_t, 8> kc{};

    friend bool operator==(const AuthResult&, const AuthResult&) = default;
};

// Intermediate butterfly state: 32 lanes, plus how many levels of which
// round produced it. After level k the lanes fit in (9-k) bits; after all
// five levels they are nibbles.
struct CompressionState {
    std::array<std::uint8_t, 32> x{};
    unsigned round = 0;
    unsigned levels = 0;
};

namespace detail {

// One butterfly level: pair lanes (m, m + stride) within each block, index
// both tables with the two modular mixes, and replace the pair.
constexpr void butterfly_level(std::array<std::uint8_t, 32>& x, unsigned j,
                               const TableSet& tables) {
    const std::uint8_t* table = tables.level(j);
    const unsigned mod = 1u << (9 - j);
    for (unsigned k = 0; k < (1u << j); ++k) {
        for (unsigned l = 0; l < (1u << (4 - j)); ++l) {
            unsigned m = l + k * (1u << (5 - j));
            unsigned n = m + (1u << (4 - j));
            unsigned y = (x[m] + 2u * x[n]) % mod;
            unsigned z = (2u * x[m] + x[n]) % mod;
            x[m] = table[y];
            x[n] = table[z];
        }
    }
}

// Nibbles -> 128 bits -> bytes, spreading each bit to position (i*17) mod 128.
constexpr void permute_into(const std::array<std::uint8_t, 32>& x,
                            std::array<std::uint8_t, 16>& out) {
    std::array<std::uint8_t, 128> bit{};
    for (unsigned j = 0; j < 32; ++j)
        for (unsigned k = 0; k < 4; ++k) bit[4 * j + k] = (x[j] >> (3 - k)) & 1;
    for (unsigned j = 0; j < 16; ++j) {
        std::uint8_t v = 0;
        for (unsigned k = 0; k < 8; ++k) {
            unsigned next_bit = ((8 * j + k) * 17) % 128;
            v = static_cast<std::uint8_t>(v | (bit[next_bit] << (7 - k)));
        }
        out[j] = v;
    }
}

} // namespace detail

// COMP128-1 (A3/A8): eight rounds; each round reloads Ki into lanes 0..15,
// the evolving challenge image into lanes 16..31, runs the five butterfly
// levels, and (except after the last round) permutes the 128 state bits by
// the x17 rule before feeding them back. The final 32 nibbles pack into
// 4 bytes of SRES and 8 bytes of Kc; Kc's last 10 bits are forced to zero.
constexpr AuthResult comp128v1(const SecretKey& key, const Challenge& challenge,
                               const TableSet& tables = kLabTables) {
    std::array<std::uint8_t, 32> x{};
    std::array<std::uint8_t, 16> feed = challenge.rand;

    for (unsigned round = 0; round < 8; ++round) {
        for (unsigned j = 0; j < 16; ++j) x[j] = key.ki[j];
        for (unsigned j = 0; j < 16; ++j) x[16 + j] = feed[j];
        for (unsigned j = 0; j < 5; ++j) detail::butterfly_level(x, j, tables);
        if (round < 7) detail::permute_into(x, feed);
    }

    AuthResult out;
    for (unsigned i = 0; i < 4; ++i)
        out.sres[i] = static_cast<std::uint8_t>((x[2 * i] << 4) | x[2 * i + 1]);
    for (unsigned i = 0; i < 6; ++i)
        out.kc[i] = static_cast<std::uint8_t>((x[2 * i + 18] << 6) | (x[2 * i + 19] << 2) |
                                              (x[2 * i + 20] >> 2));
    out.kc[6] = static_cast<std::uint8_t>((x[30] << 6) | (x[31] << 2));
    out.kc[7] = 0;
    return out;
}

// Intermediate compression state after exactly `levels` butterfly levels of
// round `round` (earlier rounds run in full). levels in 1..5, round in 0..7.
inline CompressionState butterfly_levels(const SecretKey& key, const Challenge& challenge,
                                         unsigned round, unsigned levels,
                                         const TableSet& tables = kLabTables) {
    if (round > 7) throw InputError("round must be in 0..7");
    if (levels < 1 || levels > 5) throw InputError("levels must be in 1..5");

    std::array<std::uint8_t, 32> x{};
    std::array<std::uint8_t, 16> feed = challenge.rand;

    for (unsigned r = 0; r <= round; ++r) {
        for (unsigned j = 0; j < 16; ++j) x[j] = key.ki[j];
        for (unsigned j = 0; j < 16; ++j) x[16 + j] = feed[j];
        unsigned level_count = (r == round) ? levels : 5;
        for (unsigned j = 0; j < level_count; ++j) detail::butterfly_level(x, j, tables);
        if (r < round) detail::permute_into(x, feed);
    }

    return CompressionState{x, round, levels};
}

// The two-level "narrow pipe" of round 0 restricted to the lanes fed by key
// bytes (i, i+8) and challenge bytes (i, i+8). Because the first butterfly
// level pairs lane i with lane i+16 and the second pairs i with i+8, these
// four lanes depend on nothing else -- the locality the collision attack
// filters against. Positionally independent of i.
constexpr std::array<std::uint8_t, 4> narrow_pipe(std::uint8_t key_a, std::uint8_t key_b,
                                                  std::uint8_t rand_a, std::uint8_t rand_b,
                                                  const TableSet& tables = kLabTables) {
    unsigned xa = tables.t0[(key_a + 2u * rand_a) % 512];
    unsigned xc = tables.t0[(2u * key_a + rand_a) % 512];
    unsigned xb = tables.t0[(key_b + 2u * rand_b) % 512];
    unsigned xd = tables.t0[(2u * key_b + rand_b) % 512];
    return {
        tables.t1[(xa + 2u * xb) % 256],
        tables.t1[(2u * xa + xb) % 256],
        tables.t1[(xc + 2u * xd) % 256],
        tables.t1[(2u * xc + xd) % 256],
    };
}

} // namespace iridlab::comp128
