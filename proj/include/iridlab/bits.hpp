#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iridlab/errors.hpp"

namespace iridlab {

// Bit strings are kept as one byte per bit (0/1). Bursts are short (tens to
// a few thousand bits) so the simplicity beats a packed representation.
using Bits = std::vector<std::uint8_t>;

inline Bits bits_from_string(const std::string& s) {
    Bits out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw InputError("bit string may contain only 0/1");
        out.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return out;
}

inline std::string bits_to_string(const Bits& b) {
    std::string s;
    s.reserve(b.size());
    for (auto v : b) s.push_back(v ? '1' : '0');
    return s;
}

// MSB-first append of the low `width` bits of `value`.
inline void append_uint(Bits& b, std::uint64_t value, unsigned width) {
    for (unsigned i = 0; i < width; ++i)
        b.push_back(static_cast<std::uint8_t>((value >> (width - 1 - i)) & 1));
}

// MSB-first read of `width` bits starting at `pos`.
inline std::uint64_t read_uint(const Bits& b, std::size_t pos, unsigned width) {
    if (pos + width > b.size()) throw InputError("bit read past end of burst");
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i) v = (v << 1) | b[pos + i];
    return v;
}

inline void append_bytes(Bits& b, const std::vector<std::uint8_t>& bytes) {
    for (auto by : bytes) append_uint(b, by, 8);
}

inline std::vector<std::uint8_t> read_bytes(const Bits& b, std::size_t pos, std::size_t n) {
    std::vector<std::uint8_t> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(static_cast<std::uint8_t>(read_uint(b, pos + 8 * i, 8)));
    return out;
}

inline std::string hex_encode(const std::uint8_t* data, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0xF]);
    }
    return s;
}

inline std::vector<std::uint8_t> hex_decode(const std::string& s) {
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.size() % 2 != 0) throw InputError("hex string must have even length");
    std::vector<std::uint8_t> out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2) {
        int hi = nib(s[i]), lo = nib(s[i + 1]);
        if (hi < 0 || lo < 0) throw InputError("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

} // namespace iridlab
