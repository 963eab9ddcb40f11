// iridlab: command-line front end for the Iridium radio-link lab.
//
// Subcommands: crack, parse, stats, jam-curve, simulate, encode, modulate.
// Exit codes: 0 success, 1 operational error, 2 usage error.
// Every random choice derives from --seed (or IRIDLAB_SEED).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iridlab/frame_codec.hpp"
#include "iridlab/jamming.hpp"
#include "iridlab/ki_extraction.hpp"
#include "iridlab/link_sim.hpp"
#include "iridlab/modem.hpp"
#include "iridlab/rng.hpp"
#include "iridlab/sim_card.hpp"
#include "iridlab/traffic.hpp"

using namespace iridlab;

namespace {

std::vector<codec::BurstRecord> load_ibr_file(const std::string& path, bool skip_bad) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);
    std::vector<codec::BurstRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("IBR ", 0) != 0) continue; // transcripts mix line kinds
        try {
            records.push_back(codec::parse_ibr_line(line));
        } catch (const Error& e) {
            if (!skip_bad)
                throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw ConfigError("cannot open output file: " + path);
    return file;
}

int run_crack(std::uint64_t seed, const std::string& oracle_kind, unsigned keys,
              std::optional<std::uint64_t> counter_limit, std::uint64_t latency_us,
              const std::string& schedule, const std::string& card_profile,
              const std::string& transcript_path, bool csv) {
    if (oracle_kind == "external")
        throw TransportError(
            "external card reader not configured in this build; use --oracle simulated");

    attack::CrackConfig cfg;
    cfg.schedule = schedule == "random" ? attack::CollisionSchedule::random
                                        : attack::CollisionSchedule::prepared;
    std::ofstream tfile;
    std::ostream* tout = nullptr;
    if (!transcript_path.empty()) {
        tfile.open(transcript_path);
        if (!tfile) throw ConfigError("cannot open transcript file: " + transcript_path);
        tout = &tfile;
    }

    Rng rng(seed);
    std::vector<std::uint64_t> totals;
    unsigned recovered_count = 0;
    if (!card_profile.empty()) keys = 1; // attacking one specific card
    if (csv) std::cout << "key,recovered,queries,card_seconds\n";
    for (unsigned k = 0; k < keys; ++k) {
        sim::SubscriberIdentity id{"901234567890123", {}};
        rng.fill_bytes(id.key.ki.begin(), id.key.ki.end());
        sim::SimProfile card(id, counter_limit, latency_us);
        if (!card_profile.empty()) {
            std::ifstream pf(card_profile);
            if (!pf) throw ConfigError("cannot open card profile: " + card_profile);
            card = sim::load_profile(pf);
            id = card.identity();
        }
        cfg.seed = splitmix64_step(seed) + k;

        attack::KeyRecovery attack_run(
            [&card](const comp128::Challenge& c) { return card.run_gsm_algorithm(c); }, cfg);
        auto key = attack_run.recover();
        const auto& state = attack_run.state();
        bool exact = key == id.key;
        recovered_count += exact;
        totals.push_back(state.query_count);

        double card_seconds = static_cast<double>(card.simulated_elapsed_us()) / 1e6;
        if (csv) {
            std::printf("%u,%d,%llu,%.3f\n", k, exact ? 1 : 0,
                        static_cast<unsigned long long>(state.query_count), card_seconds);
        } else {
            std::printf("key %2u: recovered=%s queries=%llu card_time=%.1fs ki=%s\n", k,
                        exact ? "yes" : "NO",
                        static_cast<unsigned long long>(state.query_count), card_seconds,
                        hex_encode(key.ki.data(), 16).c_str());
        }
        if (tout) {
            *tout << "key " << k << "\n";
            for (unsigned p = 0; p < 8; ++p) {
                const auto& pair = state.pairs[p];
                *tout << "pair " << p << " queries " << pair.queries << " collisions "
                      << pair.collisions << " candidate_sizes";
                for (auto n : pair.candidate_sizes) *tout << " " << n;
                *tout << "\n";
            }
            *tout << "recovered " << hex_encode(key.ki.data(), 16) << " exact "
                  << (exact ? "true" : "false") << "\n";
            *tout << "total_queries " << state.query_count << "\n";
        }
    }
    if (!csv && keys > 1) {
        std::sort(totals.begin(), totals.end());
        std::printf("recovered %u/%u keys; query count min=%llu median=%llu max=%llu\n",
                    recovered_count, keys, static_cast<unsigned long long>(totals.front()),
                    static_cast<unsigned long long>(totals[totals.size() / 2]),
                    static_cast<unsigned long long>(totals.back()));
    }
    return recovered_count == keys ? 0 : 1;
}

int run_parse(const std::string& input, bool csv) {
    std::ifstream in(input);
    if (!in) throw ConfigError("cannot open input file: " + input);
    std::string line;
    std::size_t line_no = 0, ok = 0, bad = 0;
    if (csv) std::cout << "line,category,bits,freq_hz\n";
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("IBR ", 0) != 0) continue;
        try {
            auto rec = codec::parse_ibr_line(line);
            auto category = codec::classify_frame(rec);
            ++ok;
            if (csv)
                std::printf("%zu,%s,%zu,%llu\n", line_no, codec::to_string(category),
                            rec.bits.size(), static_cast<unsigned long long>(rec.freq_hz));
            else
                std::printf("line %4zu: %-11s %4zu bits  %.4f MHz  snr %.1f dB\n", line_no,
                            codec::to_string(category), rec.bits.size(),
                            static_cast<double>(rec.freq_hz) / 1e6, rec.snr_db);
        } catch (const Error& e) {
            ++bad;
            std::printf("line %4zu: INVALID (%s)\n", line_no, e.what());
        }
    }
    std::printf("%zu valid, %zu invalid\n", ok, bad);
    return bad == 0 ? 0 : 1;
}

int run_stats(const std::string& input, bool privacy, bool acknowledged,
              const std::string& payload_out, bool csv) {
    auto records = load_ibr_file(input, true);
    auto lanes = traffic::cluster_lanes(records);
    std::vector<traffic::Session> sessions;
    sessions.reserve(lanes.size());
    for (const auto& lane : lanes) sessions.push_back(traffic::reassemble(lane, records));
    auto stats = traffic::privacy_stats(sessions);

    if (csv) {
        std::cout << traffic::render_csv(stats);
    } else {
        std::printf("%zu bursts, %zu lanes, %zu sessions\n\n", records.size(), lanes.size(),
                    sessions.size());
        std::cout << traffic::render_frame_table(stats) << "\n"
                  << traffic::render_entropy_table(stats);
    }

    if (!privacy) {
        // Payload retention demands the explicit acknowledgment flag.
        std::ofstream pf;
        auto& out = open_output(pf, payload_out);
        for (std::size_t i = 0; i < sessions.size(); ++i) {
            const auto& s = sessions[i];
            out << "session " << i << " " << codec::to_string(s.category) << " entropy "
                << s.entropy_bits_per_byte << " payload "
                << hex_encode(s.payload.data(), s.payload.size()) << "\n";
        }
        (void)acknowledged;
    }
    return 0;
}

int run_jam_curve(double from_db, double to_db, double step_db, std::uint64_t trials,
                  std::uint64_t seed, bool csv) {
    if (step_db <= 0) throw InputError("--step must be positive");
    auto js50 = jam::js_for_prr(0.5);
    if (csv) {
        std::cout << "js_db,analytic_prr,empirical_prr,ci95\n";
    } else {
        std::printf("PRR(js) for the 3x31-bit ring-alert model; %llu trials per point\n",
                    static_cast<unsigned long long>(trials));
        std::printf("computed 50%% crossing: %.4f dB (linear %.5f)\n", js50.db(), js50.value);
        std::printf("reported figure value: -2.93 dB -> analytic PRR %.4f at that ratio\n",
                    jam::prr(jam::JsRatio::from_db(-2.93)));
        std::printf("%8s %14s %14s %12s\n", "js_dB", "analytic", "empirical", "ci95");
    }
    int row = 0;
    for (double db = from_db; db <= to_db + 1e-9; db += step_db, ++row) {
        auto js = jam::JsRatio::from_db(db);
        double analytic = jam::prr(js);
        double empirical = jam::monte_carlo_prr(js, trials, seed + static_cast<std::uint64_t>(row));
        double ci = 1.96 * std::sqrt(std::max(empirical * (1.0 - empirical), 1e-12) /
                                     static_cast<double>(trials));
        if (csv)
            std::printf("%.3f,%.9f,%.9f,%.9f\n", db, analytic, empirical, ci);
        else
            std::printf("%8.2f %14.6f %14.6f %12.6f\n", db, analytic, empirical, ci);
    }
    return 0;
}

// Scenario config files: one key=value per line. Keys: seed,
// negative_control, jammer_js_db, ring_alert_attempts, spoof_ring_alerts.
linksim::ScenarioConfig load_scenario_config(const std::string& path,
                                             linksim::ScenarioConfig cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario config: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value", 0);
        auto key = line.substr(0, eq);
        auto value = line.substr(eq + 1);
        if (key == "seed")
            cfg.seed = std::stoull(value);
        else if (key == "negative_control")
            cfg.negative_control = value == "true" || value == "1";
        else if (key == "jammer_js_db")
            cfg.jammer_js_db = std::stod(value);
        else if (key == "ring_alert_attempts")
            cfg.ring_alert_attempts = static_cast<unsigned>(std::stoul(value));
        else if (key == "spoof_ring_alerts")
            cfg.spoof_ring_alerts = static_cast<unsigned>(std::stoul(value));
        else
            throw ParseError("unknown scenario config key: " + key, 0);
    }
    return cfg;
}

int run_simulate(const std::string& scenario, std::uint64_t seed, bool negative, double js_db,
                 const std::string& config_path, const std::string& transcript_path) {
    linksim::ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.negative_control = negative;
    cfg.jammer_js_db = js_db;
    if (!config_path.empty()) cfg = load_scenario_config(config_path, cfg);
    auto outcome = linksim::run_scenario(scenario, cfg);

    std::printf("scenario %s seed %llu\n", scenario.c_str(),
                static_cast<unsigned long long>(cfg.seed));
    std::printf("verdict        %s\n", linksim::to_string(outcome.verdict));
    std::printf("final phase    %s\n", linksim::to_string(outcome.final_phase));
    std::printf("frames sent    %llu\n", static_cast<unsigned long long>(outcome.frames_sent));
    if (outcome.queries_used)
        std::printf("oracle queries %llu\n",
                    static_cast<unsigned long long>(outcome.queries_used));

    if (!transcript_path.empty()) {
        std::ofstream out(transcript_path);
        if (!out) throw ConfigError("cannot open transcript file: " + transcript_path);
        out << linksim::serialize_transcript(outcome.transcript);
    }
    return 0;
}

int run_encode(const std::string& kind, unsigned beam, std::optional<std::uint32_t> paged,
               unsigned sequence, int x_km, int y_km, int z_km, const std::string& pos_kind,
               const std::string& category, const std::string& payload_hex,
               std::uint64_t timestamp_ms, std::uint64_t freq_hz, const std::string& out_path) {
    Bits bits;
    if (kind == "ring-alert") {
        codec::RingAlertFrame f;
        f.beam_id = static_cast<std::uint8_t>(beam);
        f.sequence = static_cast<std::uint16_t>(sequence);
        f.paged_identity = paged;
        bits = codec::encode_ring_alert(f);
    } else if (kind == "position") {
        codec::PositionReport p;
        p.x_km = x_km;
        p.y_km = y_km;
        p.z_km = z_km;
        p.kind = pos_kind == "estimate" ? codec::PositionKind::network_estimate
                                        : codec::PositionKind::last_known;
        bits = codec::encode_position_report(p);
    } else if (kind == "traffic") {
        codec::TrafficFrame f;
        bool found = false;
        for (auto c : traffic::kCategoryOrder) {
            if (category == codec::to_string(c)) {
                f.category = c;
                found = true;
            }
        }
        if (!found) throw InputError("unknown traffic category: " + category);
        f.lcw.payload_type = 1;
        f.lcw.metadata = sequence & 0x1FFFFF;
        f.payload = hex_decode(payload_hex);
        bits = codec::encode_traffic_frame(f);
    } else {
        throw InputError("unknown frame kind: " + kind);
    }

    codec::BurstRecord rec;
    rec.timestamp_ms = timestamp_ms;
    rec.freq_hz = freq_hz;
    rec.snr_db = 30.0;
    rec.confidence = 99;
    rec.bits = bits;
    std::ofstream file;
    auto& out = open_output(file, out_path);
    out << codec::serialize_ibr_line(rec) << "\n";
    return 0;
}

int run_modulate(const std::string& input, const std::string& output, double sample_rate,
                 double amplitude, double center_freq, double freq_offset) {
    auto records = load_ibr_file(input, false);
    if (records.empty()) throw InputError("no IBR lines in input");

    modem::ModulationParams params;
    params.sample_rate = sample_rate;
    params.amplitude = amplitude;
    params.center_freq_hz = center_freq;
    params.freq_offset_hz = freq_offset;

    std::vector<std::complex<float>> samples;
    std::vector<modem::Annotation> annotations;
    for (const auto& rec : records) {
        Bits bits = rec.bits;
        bool padded = bits.size() % 2 != 0;
        if (padded) bits.push_back(0); // DQPSK needs whole dibits
        auto iq = modem::modulate(bits, params);
        auto category = codec::classify_frame(rec);
        annotations.push_back({samples.size(), iq.size(),
                               std::string(codec::to_string(category)) +
                                   (padded ? "+pad1" : "")});
        samples.insert(samples.end(), iq.begin(), iq.end());
    }
    modem::write_iq(output, samples, params, annotations);
    std::printf("wrote %zu samples (%zu bursts) to %s (+ %s.json)\n", samples.size(),
                records.size(), output.c_str(), output.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iridium radio-link security laboratory"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "global random seed")->envname("IRIDLAB_SEED");

    // crack
    auto* crack = app.add_subcommand("crack", "extract Ki from a SIM oracle");
    std::string oracle_kind = "simulated";
    unsigned keys = 1;
    std::optional<std::uint64_t> counter_limit;
    std::uint64_t latency_us = 0;
    std::string schedule = "prepared";
    std::string card_profile;
    std::string crack_transcript;
    bool crack_csv = false;
    crack->add_option("--oracle", oracle_kind, "simulated|external")
        ->check(CLI::IsMember({"simulated", "external"}));
    crack->add_option("--keys", keys, "number of random cards to attack");
    crack->add_option("--counter-limit", counter_limit, "card authentication counter");
    crack->add_option("--card-latency-us", latency_us, "simulated card I/O time per query");
    crack->add_option("--schedule", schedule, "prepared|random challenge schedule")
        ->check(CLI::IsMember({"prepared", "random"}));
    crack->add_option("--card-profile", card_profile,
                      "attack the card described by a key-value profile file");
    crack->add_option("--transcript", crack_transcript, "write a line-oriented crack log");
    crack->add_flag("--csv", crack_csv, "machine-readable output");

    // parse
    auto* parse = app.add_subcommand("parse", "validate and classify IBR lines");
    std::string parse_input;
    bool parse_csv = false;
    parse->add_option("--input", parse_input, "IBR file")->required();
    parse->add_flag("--csv", parse_csv, "machine-readable output");

    // stats
    auto* stats = app.add_subcommand("stats", "cluster, reassemble and aggregate traffic");
    std::string stats_input, payload_out;
    bool no_privacy = false, acknowledged = false, stats_csv = false;
    stats->add_option("--input", stats_input, "IBR file")->required();
    stats->add_flag("--no-privacy", no_privacy,
                    "retain payloads (requires --i-understand-payload-retention)");
    stats->add_flag("--i-understand-payload-retention", acknowledged,
                    "acknowledge that payload retention defeats the privacy pipeline");
    stats->add_option("--payload-out", payload_out, "where to write retained payloads");
    stats->add_flag("--csv", stats_csv, "machine-readable output");

    // jam-curve
    auto* jamc = app.add_subcommand("jam-curve", "analytic + Monte-Carlo PRR over J/S");
    double from_db = -10.0, to_db = 5.0, step_db = 1.0;
    std::uint64_t trials = 100000;
    bool jam_csv = false;
    jamc->add_option("--from", from_db, "start J/S in dB");
    jamc->add_option("--to", to_db, "end J/S in dB");
    jamc->add_option("--step", step_db, "step in dB");
    jamc->add_option("--trials", trials, "Monte-Carlo trials per point");
    jamc->add_flag("--csv", jam_csv, "machine-readable output");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run an attack scenario");
    std::string scenario;
    bool negative = false;
    double js_db = 3.0;
    std::string sim_transcript, sim_config;
    simulate->add_option("scenario", scenario, "one of the six attack primitives")
        ->required()
        ->check(CLI::IsMember(linksim::scenario_names()));
    simulate->add_flag("--negative-control", negative,
                       "wrong key / corrupted replay / weak jammer");
    simulate->add_option("--js", js_db, "jammer-to-signal ratio in dB (jam_registration)");
    simulate->add_option("--config", sim_config, "key-value scenario config file");
    simulate->add_option("--transcript", sim_transcript, "write the transcript file");

    // encode
    auto* encode = app.add_subcommand("encode", "build a synthetic burst as an IBR line");
    std::string kind = "ring-alert", pos_kind = "last_known", category = "IP Data";
    std::string payload_hex;
    unsigned beam = 12, sequence = 0;
    std::optional<std::uint32_t> paged;
    int x_km = 6371, y_km = 0, z_km = 0;
    std::uint64_t timestamp_ms = 0, freq_hz = 1626270000;
    std::string encode_out;
    encode->add_option("--type", kind, "ring-alert|position|traffic")
        ->check(CLI::IsMember({"ring-alert", "position", "traffic"}));
    encode->add_option("--beam", beam, "beam id (ring alerts)");
    encode->add_option("--paged-id", paged, "paged identity (ring alerts)");
    encode->add_option("--sequence", sequence, "frame sequence number");
    encode->add_option("--x", x_km, "geocentric x in km");
    encode->add_option("--y", y_km, "geocentric y in km");
    encode->add_option("--z", z_km, "geocentric z in km");
    encode->add_option("--kind", pos_kind, "last_known|estimate")
        ->check(CLI::IsMember({"last_known", "estimate"}));
    encode->add_option("--category", category, "traffic frame category");
    encode->add_option("--payload-hex", payload_hex, "traffic payload bytes");
    encode->add_option("--timestamp-ms", timestamp_ms, "burst timestamp");
    encode->add_option("--freq", freq_hz, "burst frequency in Hz");
    encode->add_option("--output", encode_out, "output path (default stdout)");

    // modulate
    auto* modulate = app.add_subcommand("modulate", "IBR lines -> IQ samples + sidecar");
    std::string mod_input, mod_output = "out.iq";
    double sample_rate = 250000.0, amplitude = 1.0;
    double center_freq = 1626250000.0, freq_offset = 0.0;
    modulate->add_option("--input", mod_input, "IBR file")->required();
    modulate->add_option("--output", mod_output, "IQ output path");
    modulate->add_option("--sample-rate", sample_rate, "samples per second (>= 100 kHz)");
    modulate->add_option("--amplitude", amplitude, "linear amplitude scale");
    modulate->add_option("--center-freq", center_freq, "sidecar center frequency in Hz");
    modulate->add_option("--freq-offset", freq_offset, "complex baseband shift in Hz");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*crack)
            return run_crack(seed, oracle_kind, keys, counter_limit, latency_us, schedule,
                             card_profile, crack_transcript, crack_csv);
        if (*parse) return run_parse(parse_input, parse_csv);
        if (*stats) {
            if (no_privacy && !acknowledged) {
                std::fprintf(stderr,
                             "stats: --no-privacy requires --i-understand-payload-retention\n");
                return 2;
            }
            return run_stats(stats_input, !no_privacy, acknowledged, payload_out, stats_csv);
        }
        if (*jamc) return run_jam_curve(from_db, to_db, step_db, trials, seed, jam_csv);
        if (*simulate)
            return run_simulate(scenario, seed, negative, js_db, sim_config, sim_transcript);
        if (*encode)
            return run_encode(kind, beam, paged, sequence, x_km, y_km, z_km, pos_kind, category,
                              payload_hex, timestamp_ms, freq_hz, encode_out);
        if (*modulate)
            return run_modulate(mod_input, mod_output, sample_rate, amplitude, center_freq,
                                freq_offset);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
