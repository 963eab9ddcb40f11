#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "iridlab/errors.hpp"
#include "iridlab/frame_codec.hpp"

namespace iridlab::traffic {

using codec::BurstRecord;
using codec::FrameCategory;

// ---- Lane clustering --------------------------------------------------------
//
// Bursts of one user session ride a slowly drifting carrier and recur every
// 90 ms TDMA frame. Clustering is a greedy fold over time-ordered bursts:
// a burst joins the lane whose predicted frequency and slot phase it matches
// within tolerance, else it opens a new lane. Deterministic given input
// order.

struct ClusterTolerances {
    double freq_hz = 5000.0;
    double drift_hz_per_s = 100.0;
    double slot_ms = 9.0;
};

struct Lane {
    std::uint64_t center_freq_hz = 0;   // frequency of the first burst
    double drift_rate_hz_per_s = 0.0;   // least-squares-free two-point estimate
    double slot_phase_ms = 0.0;         // timestamp mod 90 of the first burst
    std::vector<std::size_t> members;   // indices into the clustered records

    // Prediction state.
    std::uint64_t first_ms = 0;
    std::uint64_t last_ms = 0;
    double last_freq_hz = 0.0;
};

namespace detail {

inline double circular_slot_distance_ms(double a, double b) {
    double d = std::fmod(std::fabs(a - b), codec::kTdmaFrameMs);
    return std::min(d, codec::kTdmaFrameMs - d);
}

} // namespace detail

inline std::vector<Lane> cluster_lanes(const std::vector<BurstRecord>& records,
                                       ClusterTolerances tol = {}) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].timestamp_ms < records[b].timestamp_ms;
    });

    std::vector<Lane> lanes;
    for (auto idx : order) {
        const auto& rec = records[idx];
        double phase = std::fmod(static_cast<double>(rec.timestamp_ms), codec::kTdmaFrameMs);

        Lane* best = nullptr;
        double best_err = tol.freq_hz;
        for (auto& lane : lanes) {
            if (detail::circular_slot_distance_ms(phase, lane.slot_phase_ms) > tol.slot_ms)
                continue;
            double dt_s = static_cast<double>(rec.timestamp_ms - lane.last_ms) / 1000.0;
            double predicted = lane.last_freq_hz + lane.drift_rate_hz_per_s * dt_s;
            double err = std::fabs(static_cast<double>(rec.freq_hz) - predicted);
            if (err <= best_err) {
                best_err = err;
                best = &lane;
            }
        }

        if (best == nullptr) {
            Lane lane;
            lane.center_freq_hz = rec.freq_hz;
            lane.slot_phase_ms = phase;
            lane.first_ms = lane.last_ms = rec.timestamp_ms;
            lane.last_freq_hz = static_cast<double>(rec.freq_hz);
            lane.members.push_back(idx);
            lanes.push_back(std::move(lane));
            continue;
        }

        best->members.push_back(idx);
        double span_s = static_cast<double>(rec.timestamp_ms - best->first_ms) / 1000.0;
        if (span_s > 0) {
            double drift = (static_cast<double>(rec.freq_hz) -
                            static_cast<double>(best->center_freq_hz)) /
                           span_s;
            best->drift_rate_hz_per_s =
                std::clamp(drift, -tol.drift_hz_per_s, tol.drift_hz_per_s);
        }
        best->last_ms = rec.timestamp_ms;
        best->last_freq_hz = static_cast<double>(rec.freq_hz);
    }
    return lanes;
}

// ---- Session reassembly -----------------------------------------------------

struct Session {
    Lane lane;
    std::vector<std::uint8_t> payload;
    double entropy_bits_per_byte = 0.0;
    FrameCategory category = FrameCategory::Unknown;
    bool complete = false;
};

// Plug-in (maximum likelihood) estimator over byte frequencies, in
// bits per byte. No bias correction; small samples read low.
inline double shannon_entropy(const std::vector<std::uint8_t>& payload) {
    if (payload.empty()) throw InputError("entropy of an empty payload is undefined");
    std::array<std::uint64_t, 256> counts{};
    for (auto b : payload) ++counts[b];
    double h = 0.0;
    const double n = static_cast<double>(payload.size());
    for (auto c : counts) {
        if (c == 0) continue;
        double p = c / n;
        h -= p * std::log2(p);
    }
    return h;
}

enum class EntropyClass { HighEntropy, LowEntropy, Indeterminate };

inline const char* to_string(EntropyClass c) {
    switch (c) {
        case EntropyClass::HighEntropy: return "high";
        case EntropyClass::LowEntropy: return "low";
        case EntropyClass::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

// The >7 bits/byte rule flags encrypted or compressed payloads; payloads
// under 64 bytes are too short for the plug-in estimator to mean much.
inline EntropyClass classify_entropy(double h, std::size_t length) {
    if (h < 0.0 || h > 8.0) throw InputError("entropy must be in [0, 8]");
    if (length < 64) return EntropyClass::Indeterminate;
    return h > 7.0 ? EntropyClass::HighEntropy : EntropyClass::LowEntropy;
}

// Concatenates member payloads in slot order, dropping headers, CRCs and
// filler. Identical duplicate slots deduplicate; conflicting duplicates are
// an error. `complete` additionally requires every 90 ms slot between the
// first and last burst to be present and decodable.
inline Session reassemble(const Lane& lane, const std::vector<BurstRecord>& records) {
    Session session;
    session.lane = lane;
    if (lane.members.empty()) return session;

    std::vector<std::size_t> order = lane.members;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].timestamp_ms < records[b].timestamp_ms;
    });

    const std::uint64_t t0 = records[order.front()].timestamp_ms;
    std::map<std::uint64_t, std::size_t> by_slot;
    for (auto idx : order) {
        auto slot = static_cast<std::uint64_t>(std::llround(
            static_cast<double>(records[idx].timestamp_ms - t0) / codec::kTdmaFrameMs));
        auto [it, inserted] = by_slot.emplace(slot, idx);
        if (!inserted) {
            if (records[it->second].bits == records[idx].bits) continue; // idempotent dup
            throw DuplicateSlot("slot " + std::to_string(slot) + " claimed by bursts at " +
                                std::to_string(records[it->second].timestamp_ms) + " ms and " +
                                std::to_string(records[idx].timestamp_ms) + " ms");
        }
    }

    bool all_slots_decoded = true;
    std::uint64_t expected_slot = 0;
    for (const auto& [slot, idx] : by_slot) {
        if (slot != expected_slot) all_slots_decoded = false;
        expected_slot = slot + 1;

        const auto& rec = records[idx];
        auto category = codec::classify_frame(rec);
        if (session.category == FrameCategory::Unknown) session.category = category;
        switch (category) {
            case FrameCategory::RingAlert:
            case FrameCategory::Acquisition:
            case FrameCategory::Unknown:
                break; // no user payload to strip
            default: {
                try {
                    auto frame = codec::decode_traffic_frame(rec);
                    session.payload.insert(session.payload.end(), frame.payload.begin(),
                                           frame.payload.end());
                } catch (const Error&) {
                    all_slots_decoded = false; // corrupt frame = lost slot
                }
            }
        }
    }

    session.complete = all_slots_decoded;
    if (!session.payload.empty())
        session.entropy_bits_per_byte = shannon_entropy(session.payload);
    return session;
}

// ---- Privacy-preserving aggregates -------------------------------------------
//
// Only counts leave this stage; payload bytes never appear in AggregateStats
// or anything rendered from it.

struct CategoryCounts {
    std::uint64_t frames = 0;
    std::uint64_t sessions = 0;
    std::uint64_t high_entropy_frames = 0;

    friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

struct AggregateStats {
    // Indexed by FrameCategory value.
    std::array<CategoryCounts, 11> per_category{};

    CategoryCounts& at(FrameCategory c) { return per_category[static_cast<std::size_t>(c)]; }
    const CategoryCounts& at(FrameCategory c) const {
        return per_category[static_cast<std::size_t>(c)];
    }

    std::uint64_t total_frames() const {
        std::uint64_t n = 0;
        for (const auto& c : per_category) n += c.frames;
        return n;
    }
    std::uint64_t total_high_entropy() const {
        std::uint64_t n = 0;
        for (const auto& c : per_category) n += c.high_entropy_frames;
        return n;
    }
};

inline AggregateStats privacy_stats(const std::vector<Session>& sessions) {
    AggregateStats stats;
    for (const auto& s : sessions) {
        auto& bucket = stats.at(s.category);
        bucket.frames += s.lane.members.size();
        bucket.sessions += 1;
        auto entropy_class = classify_entropy(s.entropy_bits_per_byte, s.payload.size());
        if (entropy_class == EntropyClass::HighEntropy)
            bucket.high_entropy_frames += s.lane.members.size();
    }
    return stats;
}

inline constexpr std::array<FrameCategory, 11> kCategoryOrder{
    FrameCategory::Acquisition, FrameCategory::Messaging, FrameCategory::Voice,
    FrameCategory::Next,        FrameCategory::RingAlert, FrameCategory::Stl,
    FrameCategory::IpData,      FrameCategory::Broadcast, FrameCategory::SbdGsm,
    FrameCategory::Sync,        FrameCategory::Unknown,
};

// Aligned-text table of frame counts per category, percentages recomputed
// from the stored counts at render time.
inline std::string render_frame_table(const AggregateStats& stats) {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %15s %9s\n", "Category", "Count", "[%]");
    out += line;
    double total = static_cast<double>(std::max<std::uint64_t>(stats.total_frames(), 1));
    for (auto c : kCategoryOrder) {
        const auto& counts = stats.at(c);
        std::snprintf(line, sizeof line, "%-12s %15llu %8.2f%%\n", codec::to_string(c),
                      static_cast<unsigned long long>(counts.frames),
                      100.0 * static_cast<double>(counts.frames) / total);
        out += line;
    }
    std::snprintf(line, sizeof line, "%-12s %15llu %8.2f%%\n", "Total",
                  static_cast<unsigned long long>(stats.total_frames()),
                  stats.total_frames() ? 100.0 : 0.0);
    out += line;
    return out;
}

inline std::string render_entropy_table(const AggregateStats& stats) {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %15s %15s %9s\n", "Category", "Total",
                  "High Entropy", "[%]");
    out += line;
    for (auto c : kCategoryOrder) {
        const auto& counts = stats.at(c);
        if (counts.frames == 0) continue;
        double pct = counts.frames
                         ? 100.0 * static_cast<double>(counts.high_entropy_frames) /
                               static_cast<double>(counts.frames)
                         : 0.0;
        std::snprintf(line, sizeof line, "%-12s %15llu %15llu %8.2f%%\n", codec::to_string(c),
                      static_cast<unsigned long long>(counts.frames),
                      static_cast<unsigned long long>(counts.high_entropy_frames), pct);
        out += line;
    }
    double total_pct = stats.total_frames()
                           ? 100.0 * static_cast<double>(stats.total_high_entropy()) /
                                 static_cast<double>(stats.total_frames())
                           : 0.0;
    std::snprintf(line, sizeof line, "%-12s %15llu %15llu %8.2f%%\n", "Total",
                  static_cast<unsigned long long>(stats.total_frames()),
                  static_cast<unsigned long long>(stats.total_high_entropy()), total_pct);
    out += line;
    return out;
}

// Machine-readable line-oriented form: category,frames,sessions,high_entropy.
inline std::string render_csv(const AggregateStats& stats) {
    std::string out = "category,frames,sessions,high_entropy_frames\n";
    for (auto c : kCategoryOrder) {
        const auto& counts = stats.at(c);
        out += std::string(codec::to_string(c)) + "," + std::to_string(counts.frames) + "," +
               std::to_string(counts.sessions) + "," +
               std::to_string(counts.high_entropy_frames) + "\n";
    }
    return out;
}

// ---- Synthetic trace generation ----------------------------------------------
//
// Ground-truth generator used as the oracle for clustering/reassembly tests
// and for the stats demonstration corpus. Payloads split into 31-byte
// traffic frames, one per 90 ms slot, on a linearly drifting carrier.

struct SessionSpec {
    std::uint64_t start_ms = 0;
    std::uint64_t center_freq_hz = 1620000000;
    double drift_hz_per_s = 0.0;
    FrameCategory category = FrameCategory::IpData;
    std::vector<std::uint8_t> payload;
    double snr_db = 20.0;
    int confidence = 95;
};

struct GeneratedTrace {
    std::vector<BurstRecord> records;
    std::vector<std::vector<std::size_t>> membership; // record indices per session
};

inline GeneratedTrace generate_trace(const std::vector<SessionSpec>& specs) {
    GeneratedTrace trace;
    trace.membership.resize(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const auto& spec = specs[s];
        std::size_t chunks = std::max<std::size_t>(1, (spec.payload.size() + 30) / 31);
        for (std::size_t k = 0; k < chunks; ++k) {
            codec::TrafficFrame frame;
            frame.category = spec.category;
            frame.lcw.payload_type = 1;
            frame.lcw.metadata = static_cast<std::uint32_t>(k & 0x1FFFFF);
            auto begin = spec.payload.begin() + static_cast<std::ptrdiff_t>(31 * k);
            auto end = spec.payload.begin() +
                       static_cast<std::ptrdiff_t>(std::min(spec.payload.size(), 31 * (k + 1)));
            frame.payload.assign(begin, end);

            BurstRecord rec;
            rec.timestamp_ms = spec.start_ms + 90 * k;
            double dt_s = 0.09 * static_cast<double>(k);
            rec.freq_hz = static_cast<std::uint64_t>(
                std::llround(static_cast<double>(spec.center_freq_hz) +
                             spec.drift_hz_per_s * dt_s));
            rec.snr_db = spec.snr_db;
            rec.confidence = spec.confidence;
            rec.bits = codec::encode_traffic_frame(frame);
            trace.membership[s].push_back(trace.records.size());
            trace.records.push_back(std::move(rec));
        }
    }
    // Interleave by time, remembering where each record lands.
    std::vector<std::size_t> order(trace.records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return trace.records[a].timestamp_ms < trace.records[b].timestamp_ms;
    });
    std::vector<std::size_t> new_index(order.size());
    std::vector<BurstRecord> sorted;
    sorted.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        new_index[order[i]] = i;
        sorted.push_back(std::move(trace.records[order[i]]));
    }
    trace.records = std::move(sorted);
    for (auto& members : trace.membership)
        for (auto& idx : members) idx = new_index[idx];
    return trace;
}

} // namespace iridlab::traffic
