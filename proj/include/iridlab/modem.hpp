#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "iridlab/bits.hpp"
#include "iridlab/errors.hpp"

#include <json.hpp>

namespace iridlab::modem {

inline constexpr double kSymbolRateHz = 25000.0; // QPSK symbols per second

struct ModulationParams {
    double center_freq_hz = 1626250000.0; // recorded in the sidecar
    double sample_rate = 250000.0;        // must be >= 100 kHz, integer x symbol rate
    double amplitude = 1.0;
    double rolloff = 0.4;       // root-raised-cosine excess bandwidth
    int span_symbols = 8;       // filter half-support is span/2 symbols
    double freq_offset_hz = 0;  // complex baseband shift
};

namespace detail {

inline int samples_per_symbol(const ModulationParams& p) {
    if (p.sample_rate < 100000.0) throw ConfigError("sample rate below 100 kHz");
    double sps = p.sample_rate / kSymbolRateHz;
    int n = static_cast<int>(std::lround(sps));
    if (std::fabs(sps - n) > 1e-9 || n < 4)
        throw ConfigError("sample rate must be an integer multiple of 25 kHz");
    return n;
}

// Root-raised-cosine impulse response, unit peak, length span*sps + 1.
inline std::vector<double> rrc_taps(int sps, int span, double beta) {
    const int half = span * sps / 2;
    std::vector<double> taps(2 * half + 1);
    for (int i = -half; i <= half; ++i) {
        double t = static_cast<double>(i) / sps; // in symbols
        double v;
        if (std::fabs(t) < 1e-12) {
            v = 1.0 - beta + 4.0 * beta / std::numbers::pi;
        } else if (std::fabs(std::fabs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
            v = beta / std::numbers::sqrt2 *
                ((1 + 2 / std::numbers::pi) * std::sin(std::numbers::pi / (4 * beta)) +
                 (1 - 2 / std::numbers::pi) * std::cos(std::numbers::pi / (4 * beta)));
        } else {
            double num = std::sin(std::numbers::pi * t * (1 - beta)) +
                         4 * beta * t * std::cos(std::numbers::pi * t * (1 + beta));
            double den = std::numbers::pi * t * (1 - (4 * beta * t) * (4 * beta * t));
            v = num / den;
        }
        taps[i + half] = v;
    }
    // Normalize so the matched cascade has unit gain at the symbol instant.
    double energy = 0;
    for (double v : taps) energy += v * v;
    double scale = 1.0 / std::sqrt(energy);
    for (double& v : taps) v *= scale;
    return taps;
}

} // namespace detail

// Differential QPSK: each dibit advances the carrier phase by d * 90
// degrees, so an untrained receiver only needs phase differences. Bits map
// MSB-first into dibits.
inline std::vector<std::complex<float>> modulate(const Bits& bits, const ModulationParams& p) {
    if (bits.size() % 2 != 0) throw InputError("bit count must be even (2 bits per symbol)");
    const int sps = detail::samples_per_symbol(p);
    const auto taps = detail::rrc_taps(sps, p.span_symbols, p.rolloff);

    // Reference symbol followed by differentially encoded data symbols.
    std::vector<std::complex<double>> symbols;
    symbols.reserve(bits.size() / 2 + 1);
    double phase = 0.0;
    symbols.emplace_back(std::cos(phase), std::sin(phase));
    for (std::size_t i = 0; i < bits.size(); i += 2) {
        int d = 2 * bits[i] + bits[i + 1];
        phase += d * (std::numbers::pi / 2.0);
        symbols.emplace_back(std::cos(phase), std::sin(phase));
    }

    const std::size_t out_len = symbols.size() * sps + taps.size() - 1;
    std::vector<std::complex<double>> shaped(out_len, {0.0, 0.0});
    for (std::size_t k = 0; k < symbols.size(); ++k)
        for (std::size_t t = 0; t < taps.size(); ++t) shaped[k * sps + t] += symbols[k] * taps[t];

    std::vector<std::complex<float>> out(out_len);
    const double w = 2.0 * std::numbers::pi * p.freq_offset_hz / p.sample_rate;
    for (std::size_t n = 0; n < out_len; ++n) {
        auto v = shaped[n] * p.amplitude;
        if (p.freq_offset_hz != 0.0) v *= std::complex<double>(std::cos(w * n), std::sin(w * n));
        out[n] = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
    }
    return out;
}

// Matched receiver for loopback checks: RRC matched filter, symbol-spaced
// sampling at the known alignment, differential phase decisions.
inline Bits demodulate(const std::vector<std::complex<float>>& samples, std::size_t bit_count,
                       const ModulationParams& p) {
    if (bit_count % 2 != 0) throw InputError("bit count must be even");
    const int sps = detail::samples_per_symbol(p);
    const auto taps = detail::rrc_taps(sps, p.span_symbols, p.rolloff);
    const std::size_t nsym = bit_count / 2 + 1;

    std::vector<std::complex<double>> base(samples.size());
    const double w = 2.0 * std::numbers::pi * p.freq_offset_hz / p.sample_rate;
    for (std::size_t n = 0; n < samples.size(); ++n) {
        std::complex<double> v(samples[n].real(), samples[n].imag());
        if (p.freq_offset_hz != 0.0) v *= std::complex<double>(std::cos(w * n), -std::sin(w * n));
        base[n] = v;
    }

    // Matched filter; symbol k peaks at k*sps + (taps.size()-1) after the
    // TX + RX filter pair.
    auto sample_symbol = [&](std::size_t k) {
        std::complex<double> acc{0.0, 0.0};
        std::size_t center = k * sps + (taps.size() - 1);
        for (std::size_t t = 0; t < taps.size(); ++t) {
            std::size_t idx = center - t;
            if (idx < base.size()) acc += base[idx] * taps[taps.size() - 1 - t];
        }
        return acc;
    };

    Bits out;
    out.reserve(bit_count);
    std::complex<double> prev = sample_symbol(0);
    for (std::size_t k = 1; k < nsym; ++k) {
        auto cur = sample_symbol(k);
        double dphi = std::arg(cur * std::conj(prev));
        int d = static_cast<int>(std::lround(dphi / (std::numbers::pi / 2.0)));
        d = ((d % 4) + 4) % 4;
        out.push_back(static_cast<std::uint8_t>((d >> 1) & 1));
        out.push_back(static_cast<std::uint8_t>(d & 1));
        prev = cur;
    }
    return out;
}

// ---- IQ capture files -------------------------------------------------------
//
// Sample data: interleaved little-endian float32 I,Q pairs in <path>.
// Sidecar: <path>.json with capture metadata and labeled sample ranges.

struct Annotation {
    std::uint64_t sample_start = 0;
    std::uint64_t sample_count = 0;
    std::string label;
};

inline void write_iq(const std::string& path, const std::vector<std::complex<float>>& samples,
                     const ModulationParams& p, const std::vector<Annotation>& annotations = {}) {
    std::ofstream data(path, std::ios::binary);
    if (!data) throw ConfigError("cannot open IQ output file: " + path);
    for (const auto& s : samples) {
        float iq[2] = {s.real(), s.imag()};
        data.write(reinterpret_cast<const char*>(iq), sizeof iq);
    }

    nlohmann::json meta;
    meta["datatype"] = "cf32_le";
    meta["sample_rate"] = p.sample_rate;
    meta["center_frequency"] = p.center_freq_hz;
    meta["annotations"] = nlohmann::json::array();
    for (const auto& a : annotations) {
        meta["annotations"].push_back({{"sample_start", a.sample_start},
                                       {"sample_count", a.sample_count},
                                       {"label", a.label}});
    }
    std::ofstream side(path + ".json");
    if (!side) throw ConfigError("cannot open sidecar file: " + path + ".json");
    side << meta.dump(2) << "\n";
}

inline std::vector<std::complex<float>> read_iq(const std::string& path) {
    std::ifstream data(path, std::ios::binary);
    if (!data) throw ConfigError("cannot open IQ file: " + path);
    std::vector<std::complex<float>> out;
    float iq[2];
    while (data.read(reinterpret_cast<char*>(iq), sizeof iq)) out.emplace_back(iq[0], iq[1]);
    return out;
}

// Single-bin discrete Fourier probe (test instrumentation for tone checks).
inline double tone_power(const std::vector<std::complex<float>>& samples, double freq_hz,
                         double sample_rate, std::size_t begin, std::size_t count) {
    std::complex<double> acc{0.0, 0.0};
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    for (std::size_t n = 0; n < count && begin + n < samples.size(); ++n) {
        std::complex<double> v(samples[begin + n].real(), samples[begin + n].imag());
        acc += v * std::complex<double>(std::cos(w * n), -std::sin(w * n));
    }
    return std::norm(acc) / (double(count) * count);
}

} // namespace iridlab::modem
