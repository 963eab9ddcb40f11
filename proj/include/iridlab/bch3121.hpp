#pragma once

#include <array>
#include <cstdint>

#include "iridlab/errors.hpp"

namespace iridlab::codec {

// Binary (31,21) block code correcting up to 2 bit errors, used for the
// three coded blocks of a ring alert. Systematic: codeword = data<<10 |
// remainder. Decoding is a syndrome table over the 1 + 31 + C(31,2) = 497
// correctable patterns; 3 or more errors either miss the table or
// miscorrect to a different codeword, never silently back to the original.
namespace bch3121 {

inline constexpr unsigned kDataBits = 21;
inline constexpr unsigned kCodeBits = 31;
inline constexpr std::uint32_t kGenerator = 0x769; // x^10+x^9+x^8+x^6+x^5+x^3+1

constexpr std::uint32_t mod_generator(std::uint32_t value) {
    for (int bit = 30; bit >= 10; --bit)
        if (value & (1u << bit)) value ^= kGenerator << (bit - 10);
    return value; // 10-bit remainder
}

constexpr std::uint32_t encode(std::uint32_t data) {
    if (data >= (1u << kDataBits)) throw InputError("block data exceeds 21 bits");
    std::uint32_t shifted = data << 10;
    return shifted | mod_generator(shifted);
}

namespace detail {

struct SyndromeTable {
    std::array<std::uint32_t, 1024> error_for_syndrome{};
    std::array<bool, 1024> valid{};
};

constexpr SyndromeTable build_table() {
    SyndromeTable t{};
    t.error_for_syndrome[0] = 0;
    t.valid[0] = true;
    auto add = [&t](std::uint32_t pattern) {
        std::uint32_t s = mod_generator(pattern);
        if (t.valid[s] && t.error_for_syndrome[s] != pattern)
            throw InputError("syndrome clash: generator does not give distance 5");
        t.error_for_syndrome[s] = pattern;
        t.valid[s] = true;
    };
    for (unsigned i = 0; i < kCodeBits; ++i) add(1u << i);
    for (unsigned i = 0; i < kCodeBits; ++i)
        for (unsigned j = i + 1; j < kCodeBits; ++j) add((1u << i) | (1u << j));
    return t;
}

// Building the table at compile time also proves the minimum-distance
// property: any syndrome clash among <=2-bit patterns fails the build.
inline constexpr SyndromeTable kTable = build_table();

} // namespace detail

// Corrects up to 2 errors; throws CodecError when the syndrome is not a
// correctable pattern.
constexpr std::uint32_t decode(std::uint32_t received) {
    received &= (1u << kCodeBits) - 1;
    std::uint32_t syndrome = mod_generator(received);
    if (!detail::kTable.valid[syndrome])
        throw CodecError("uncorrectable block (more than 2 bit errors)");
    return (received ^ detail::kTable.error_for_syndrome[syndrome]) >> 10;
}

} // namespace bch3121

} // namespace iridlab::codec
