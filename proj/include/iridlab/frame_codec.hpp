#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "iridlab/bch3121.hpp"
#include "iridlab/bits.hpp"
#include "iridlab/errors.hpp"

namespace iridlab::codec {

// ---- Burst records and the IBR interchange line ---------------------------

inline constexpr std::uint64_t kBandLowHz = 1616000000;   // L-band lower edge
inline constexpr std::uint64_t kBandHighHz = 1626500000;  // L-band upper edge
inline constexpr double kTdmaFrameMs = 90.0;              // TDMA frame period

// One demodulated burst plus capture metadata.
struct BurstRecord {
    std::uint64_t timestamp_ms = 0;
    std::uint64_t freq_hz = kBandLowHz;
    double snr_db = 0.0;
    int confidence = 0; // 0..100
    Bits bits;

    friend bool operator==(const BurstRecord&, const BurstRecord&) = default;
};

// Grammar (one line):  IBR <timestamp_ms> <freq_hz> <snr_db> <confidence> <bits>
// Fields are single-space separated; snr_db is a decimal number, canonically
// with one fractional digit; bits are 0/1 characters. Canonical lines
// round-trip bit-exactly through parse -> serialize.
inline BurstRecord parse_ibr_line(const std::string& line) {
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) -> void { throw ParseError(what, pos); };
    auto expect_space = [&] {
        if (pos >= line.size() || line[pos] != ' ') fail("expected single space");
        ++pos;
    };
    auto read_u64 = [&](const char* what) {
        if (pos >= line.size() || line[pos] < '0' || line[pos] > '9')
            fail(std::string("expected digits for ") + what);
        std::uint64_t v = 0;
        while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') {
            v = v * 10 + (line[pos] - '0');
            ++pos;
        }
        return v;
    };

    if (line.rfind("IBR", 0) != 0) fail("line must start with IBR");
    pos = 3;
    expect_space();
    BurstRecord rec;
    rec.timestamp_ms = read_u64("timestamp_ms");
    expect_space();
    std::size_t freq_pos = pos;
    rec.freq_hz = read_u64("freq_hz");
    expect_space();

    // snr: [-]digits[.digits]
    std::size_t snr_start = pos;
    if (pos < line.size() && line[pos] == '-') ++pos;
    if (pos >= line.size() || line[pos] < '0' || line[pos] > '9') fail("expected snr_db decimal");
    while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') ++pos;
    if (pos < line.size() && line[pos] == '.') {
        ++pos;
        if (pos >= line.size() || line[pos] < '0' || line[pos] > '9')
            fail("expected fractional digits");
        while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') ++pos;
    }
    rec.snr_db = std::stod(line.substr(snr_start, pos - snr_start));
    expect_space();

    std::size_t conf_pos = pos;
    auto conf = read_u64("confidence");
    if (conf > 100) {
        pos = conf_pos;
        fail("confidence must be 0..100");
    }
    rec.confidence = static_cast<int>(conf);
    expect_space();

    if (pos >= line.size()) fail("expected bits");
    while (pos < line.size()) {
        char c = line[pos];
        if (c != '0' && c != '1') fail("bits must be 0/1");
        rec.bits.push_back(static_cast<std::uint8_t>(c - '0'));
        ++pos;
    }

    if (rec.freq_hz < kBandLowHz || rec.freq_hz > kBandHighHz) {
        (void)freq_pos;
        throw RangeError("frequency outside the 1616.0-1626.5 MHz band");
    }
    return rec;
}

inline std::string serialize_ibr_line(const BurstRecord& rec) {
    char snr[32];
    std::snprintf(snr, sizeof snr, "%.1f", rec.snr_db);
    std::string out = "IBR ";
    out += std::to_string(rec.timestamp_ms);
    out += ' ';
    out += std::to_string(rec.freq_hz);
    out += ' ';
    out += snr;
    out += ' ';
    out += std::to_string(rec.confidence);
    out += ' ';
    out += bits_to_string(rec.bits);
    return out;
}

// ---- Frame categories and the synthetic burst layout -----------------------
//
// Every synthetic burst is:  [preamble 0xAAAA : 16][unique word : 16][body]
// The unique word selects the category; bodies are per-category, below.

enum class FrameCategory {
    Acquisition,
    Messaging,
    Voice,
    Next,
    RingAlert,
    Stl,
    IpData,
    Broadcast,
    SbdGsm,
    Sync,
    Unknown,
};

inline const char* to_string(FrameCategory c) {
    switch (c) {
        case FrameCategory::Acquisition: return "Acquisition";
        case FrameCategory::Messaging: return "Messaging";
        case FrameCategory::Voice: return "Voice";
        case FrameCategory::Next: return "NEXT";
        case FrameCategory::RingAlert: return "Ring Alert";
        case FrameCategory::Stl: return "STL";
        case FrameCategory::IpData: return "IP Data";
        case FrameCategory::Broadcast: return "Broadcast";
        case FrameCategory::SbdGsm: return "SBD/GSM";
        case FrameCategory::Sync: return "Sync";
        case FrameCategory::Unknown: return "Unknown";
    }
    return "Unknown";
}

inline constexpr std::uint16_t kPreamble = 0xAAAA;

struct UniqueWordEntry {
    FrameCategory category;
    std::uint16_t word;
};

inline constexpr std::array<UniqueWordEntry, 10> kUniqueWords{{
    {FrameCategory::Acquisition, 0x7A41},
    {FrameCategory::Messaging, 0x35C9},
    {FrameCategory::Voice, 0xB286},
    {FrameCategory::Next, 0xE1F2},
    {FrameCategory::RingAlert, 0xC65D},
    {FrameCategory::Stl, 0x9B38},
    {FrameCategory::IpData, 0x4DE6},
    {FrameCategory::Broadcast, 0x58A7},
    {FrameCategory::SbdGsm, 0x2B14},
    {FrameCategory::Sync, 0x6F0B},
}};

namespace detail {
constexpr bool unique_words_distinct() {
    for (std::size_t i = 0; i < kUniqueWords.size(); ++i)
        for (std::size_t j = i + 1; j < kUniqueWords.size(); ++j)
            if (kUniqueWords[i].word == kUniqueWords[j].word) return false;
    return true;
}
static_assert(unique_words_distinct());
} // namespace detail

inline std::uint16_t unique_word(FrameCategory c) {
    for (const auto& e : kUniqueWords)
        if (e.category == c) return e.word;
    throw InputError("category has no unique word");
}

// Total and deterministic: header matching only, anything else is Unknown.
inline FrameCategory classify_frame(const BurstRecord& rec) {
    if (rec.bits.size() < 32) return FrameCategory::Unknown;
    if (read_uint(rec.bits, 0, 16) != kPreamble) return FrameCategory::Unknown;
    auto uw = static_cast<std::uint16_t>(read_uint(rec.bits, 16, 16));
    for (const auto& e : kUniqueWords)
        if (e.word == uw) return e.category;
    return FrameCategory::Unknown;
}

// ---- Link Control Word ------------------------------------------------------
//
// 30-bit header, fields most-significant-first:
//   [payload_type:3][lcw_type:2][lcw_code:4][metadata:21]

struct Lcw {
    std::uint8_t payload_type = 0; // 3 bits
    std::uint8_t lcw_type = 0;     // 2 bits
    std::uint8_t lcw_code = 0;     // 4 bits
    std::uint32_t metadata = 0;    // 21 bits

    friend bool operator==(const Lcw&, const Lcw&) = default;
};

inline std::uint32_t encode_lcw(const Lcw& lcw) {
    if (lcw.payload_type > 0x7) throw InputError("payload_type exceeds 3 bits");
    if (lcw.lcw_type > 0x3) throw InputError("lcw_type exceeds 2 bits");
    if (lcw.lcw_code > 0xF) throw InputError("lcw_code exceeds 4 bits");
    if (lcw.metadata > 0x1FFFFF) throw InputError("metadata exceeds 21 bits");
    return (std::uint32_t(lcw.payload_type) << 27) | (std::uint32_t(lcw.lcw_type) << 25) |
           (std::uint32_t(lcw.lcw_code) << 21) | lcw.metadata;
}

inline Lcw decode_lcw(std::uint32_t packed) {
    if (packed >= (1u << 30)) throw InputError("packed LCW exceeds 30 bits");
    Lcw lcw;
    lcw.payload_type = static_cast<std::uint8_t>((packed >> 27) & 0x7);
    lcw.lcw_type = static_cast<std::uint8_t>((packed >> 25) & 0x3);
    lcw.lcw_code = static_cast<std::uint8_t>((packed >> 21) & 0xF);
    lcw.metadata = packed & 0x1FFFFF;
    return lcw;
}

// ---- Ring alert frames ------------------------------------------------------
//
// Body: three (31,21) coded blocks carrying 63 data bits:
//   [beam_id:8][has_paged:1][paged_identity:32][sequence:16][spare:6]

struct RingAlertFrame {
    std::uint8_t beam_id = 0;
    std::optional<std::uint32_t> paged_identity;
    std::uint16_t sequence = 0;

    friend bool operator==(const RingAlertFrame&, const RingAlertFrame&) = default;
};

inline Bits encode_ring_alert(const RingAlertFrame& frame) {
    Bits data;
    append_uint(data, frame.beam_id, 8);
    append_uint(data, frame.paged_identity ? 1 : 0, 1);
    append_uint(data, frame.paged_identity.value_or(0), 32);
    append_uint(data, frame.sequence, 16);
    append_uint(data, 0, 6);

    Bits out;
    append_uint(out, kPreamble, 16);
    append_uint(out, unique_word(FrameCategory::RingAlert), 16);
    for (int block = 0; block < 3; ++block) {
        auto dword = static_cast<std::uint32_t>(read_uint(data, 21u * block, 21));
        append_uint(out, bch3121::encode(dword), 31);
    }
    return out;
}

inline RingAlertFrame decode_ring_alert(const Bits& bits) {
    if (bits.size() < 125) throw CodecError("ring alert burst shorter than 125 bits");
    if (read_uint(bits, 16, 16) != unique_word(FrameCategory::RingAlert))
        throw CodecError("not a ring alert burst");
    Bits data;
    for (int block = 0; block < 3; ++block) {
        auto code = static_cast<std::uint32_t>(read_uint(bits, 32 + 31u * block, 31));
        append_uint(data, bch3121::decode(code), 21);
    }
    RingAlertFrame frame;
    frame.beam_id = static_cast<std::uint8_t>(read_uint(data, 0, 8));
    bool has_paged = read_uint(data, 8, 1) != 0;
    auto paged = static_cast<std::uint32_t>(read_uint(data, 9, 32));
    if (has_paged) frame.paged_identity = paged;
    frame.sequence = static_cast<std::uint16_t>(read_uint(data, 41, 16));
    // Canonical padding: a miscorrected block cannot hide in unused fields.
    if (read_uint(data, 57, 6) != 0 || (!has_paged && paged != 0))
        throw CodecError("non-canonical ring alert body");
    return frame;
}

// ---- Position reports -------------------------------------------------------
//
// Acquisition body: [kind:1][x:14][y:14][z:14], signed two's complement
// kilometers, geocentric. The norm must land near the Earth's surface.

enum class PositionKind { last_known, network_estimate };

struct PositionReport {
    int x_km = 0;
    int y_km = 0;
    int z_km = 0;
    PositionKind kind = PositionKind::last_known;

    double norm_km() const {
        return std::sqrt(double(x_km) * x_km + double(y_km) * y_km + double(z_km) * z_km);
    }

    friend bool operator==(const PositionReport&, const PositionReport&) = default;
};

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kNormLowKm = 6200.0;
inline constexpr double kNormHighKm = 6550.0;

namespace detail {
inline std::uint64_t to_signed14(int v) {
    if (v < -8192 || v > 8191) throw InputError("coordinate exceeds 14-bit range");
    return static_cast<std::uint64_t>(v & 0x3FFF);
}
inline int from_signed14(std::uint64_t raw) {
    int v = static_cast<int>(raw & 0x3FFF);
    return (v & 0x2000) ? v - 0x4000 : v;
}
} // namespace detail

inline Bits encode_position_report(const PositionReport& report) {
    Bits out;
    append_uint(out, kPreamble, 16);
    append_uint(out, unique_word(FrameCategory::Acquisition), 16);
    append_uint(out, report.kind == PositionKind::network_estimate ? 1 : 0, 1);
    append_uint(out, detail::to_signed14(report.x_km), 14);
    append_uint(out, detail::to_signed14(report.y_km), 14);
    append_uint(out, detail::to_signed14(report.z_km), 14);
    // Pad to the 64-bit burst minimum.
    while (out.size() < 80) out.push_back(0);
    return out;
}

inline PositionReport decode_position_report(const BurstRecord& rec) {
    if (classify_frame(rec) != FrameCategory::Acquisition)
        throw CodecError("burst is not an acquisition frame");
    PositionReport report;
    report.kind = read_uint(rec.bits, 32, 1) ? PositionKind::network_estimate
                                             : PositionKind::last_known;
    report.x_km = detail::from_signed14(read_uint(rec.bits, 33, 14));
    report.y_km = detail::from_signed14(read_uint(rec.bits, 47, 14));
    report.z_km = detail::from_signed14(read_uint(rec.bits, 61, 14));
    double norm = report.norm_km();
    if (norm < kNormLowKm || norm > kNormHighKm)
        throw ImplausiblePosition("position norm " + std::to_string(norm) +
                                  " km is not near the surface");
    return report;
}

struct Geodetic {
    double lat_deg;
    double lon_deg;
};

// Spherical Earth of radius 6371 km; kilometre quantization of the
// geocentric vector keeps the surface position within a few km.
inline Geodetic convert_to_geodetic(const PositionReport& report) {
    double norm = report.norm_km();
    if (norm <= 0) throw InputError("zero position vector");
    constexpr double rad2deg = 57.29577951308232;
    return {std::asin(report.z_km / norm) * rad2deg,
            std::atan2(double(report.y_km), double(report.x_km)) * rad2deg};
}

// ---- Traffic frames ---------------------------------------------------------
//
// All payload-bearing categories share one body layout:
//   [LCW:30][payload_len:8, bytes][payload: 8*len][crc16:16][filler 0s]
// The CRC is CCITT (poly 0x1021, init 0xFFFF) over the payload bytes.
// Reassembly strips header, length, CRC and filler.

inline std::uint16_t crc16_ccitt(const std::vector<std::uint8_t>& data) {
    std::uint16_t crc = 0xFFFF;
    for (auto byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int i = 0; i < 8; ++i)
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

struct TrafficFrame {
    FrameCategory category = FrameCategory::IpData;
    Lcw lcw;
    std::vector<std::uint8_t> payload; // up to 31 bytes

    friend bool operator==(const TrafficFrame&, const TrafficFrame&) = default;
};

inline Bits encode_traffic_frame(const TrafficFrame& frame) {
    if (frame.payload.size() > 31) throw InputError("payload exceeds 31 bytes");
    if (frame.category == FrameCategory::RingAlert ||
        frame.category == FrameCategory::Acquisition ||
        frame.category == FrameCategory::Unknown)
        throw InputError("category is not a traffic frame");
    Bits out;
    append_uint(out, kPreamble, 16);
    append_uint(out, unique_word(frame.category), 16);
    append_uint(out, encode_lcw(frame.lcw), 30);
    append_uint(out, frame.payload.size(), 8);
    append_bytes(out, frame.payload);
    append_uint(out, crc16_ccitt(frame.payload), 16);
    while (out.size() < 96) out.push_back(0); // filler
    return out;
}

inline TrafficFrame decode_traffic_frame(const BurstRecord& rec) {
    auto category = classify_frame(rec);
    if (category == FrameCategory::RingAlert || category == FrameCategory::Acquisition ||
        category == FrameCategory::Unknown)
        throw CodecError("burst is not a traffic frame");
    TrafficFrame frame;
    frame.category = category;
    frame.lcw = decode_lcw(static_cast<std::uint32_t>(read_uint(rec.bits, 32, 30)));
    auto len = read_uint(rec.bits, 62, 8);
    if (len > 31) throw CodecError("payload length exceeds 31 bytes");
    frame.payload = read_bytes(rec.bits, 70, len);
    auto crc = static_cast<std::uint16_t>(read_uint(rec.bits, 70 + 8 * len, 16));
    if (crc != crc16_ccitt(frame.payload)) throw CodecError("payload CRC mismatch");
    return frame;
}

} // namespace iridlab::codec
