#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "iridlab/bits.hpp"
#include "iridlab/comp128.hpp"
#include "iridlab/errors.hpp"

namespace iridlab::sim {

using comp128::AuthResult;
using comp128::Challenge;
using comp128::SecretKey;

struct SubscriberIdentity {
    std::string imsi; // 1..15 decimal digits
    SecretKey key;

    void validate() const {
        if (imsi.empty() || imsi.size() > 15) throw InputError("imsi must be 1..15 digits");
        for (char c : imsi)
            if (c < '0' || c > '9') throw InputError("imsi must contain only digits");
    }

    friend bool operator==(const SubscriberIdentity&, const SubscriberIdentity&) = default;
};

// One SIM. Answers RUN GSM ALGORITHM queries, optionally enforcing an
// authentication counter (real Iridium cards have none; some GSM cards lock
// around 60,000 queries). Queries against one card are strictly sequential.
class SimProfile {
public:
    SimProfile() = default;
    explicit SimProfile(SubscriberIdentity identity,
                        std::optional<std::uint64_t> counter_limit = std::nullopt,
                        std::uint64_t per_query_latency_us = 0,
                        const comp128::TableSet* tables = &comp128::kLabTables)
        : identity_(std::move(identity)),
          counter_limit_(counter_limit),
          per_query_latency_us_(per_query_latency_us),
          tables_(tables) {
        identity_.validate();
        if (counter_limit_ && *counter_limit_ == 0)
            throw InputError("counter_limit must be positive when set");
    }

    AuthResult run_gsm_algorithm(const Challenge& challenge) {
        if (locked_) throw CardLocked("authentication counter exhausted");
        if (counter_limit_ && query_counter_ >= *counter_limit_) {
            locked_ = true;
            throw CardLocked("authentication counter exhausted");
        }
        ++query_counter_;
        simulated_elapsed_us_ += per_query_latency_us_;
        return comp128::comp128v1(identity_.key, challenge, *tables_);
    }

    const SubscriberIdentity& identity() const { return identity_; }
    std::uint64_t query_counter() const { return query_counter_; }
    std::optional<std::uint64_t> counter_limit() const { return counter_limit_; }
    bool locked() const { return locked_; }
    std::uint64_t per_query_latency_us() const { return per_query_latency_us_; }
    std::uint64_t simulated_elapsed_us() const { return simulated_elapsed_us_; }

    // Explicit operator intervention; nothing else clears a lock.
    void reset_counter() {
        query_counter_ = 0;
        locked_ = false;
    }

private:
    SubscriberIdentity identity_{};
    std::uint64_t query_counter_ = 0;
    std::optional<std::uint64_t> counter_limit_{};
    std::uint64_t per_query_latency_us_ = 0;
    std::uint64_t simulated_elapsed_us_ = 0;
    bool locked_ = false;
    const comp128::TableSet* tables_ = &comp128::kLabTables;
};

// Blank multi-IMSI programmable card, up to 12 identity slots.
class ProgrammableCard {
public:
    static constexpr std::size_t kSlots = 12;

    void program(std::size_t slot, SubscriberIdentity identity) {
        if (slot >= kSlots) throw InputError("card has 12 slots");
        identity.validate();
        slots_[slot] = std::move(identity);
    }

    void select(std::size_t slot) {
        if (slot >= kSlots) throw InputError("card has 12 slots");
        if (!slots_[slot]) throw InputError("selected slot is not programmed");
        active_slot_ = slot;
    }

    std::size_t active_slot() const { return active_slot_; }

    const SubscriberIdentity& identity(std::size_t slot) const {
        if (slot >= kSlots) throw InputError("card has 12 slots");
        if (!slots_[slot]) throw InputError("slot is not programmed");
        return *slots_[slot];
    }

    // The active slot answers exactly like a SimProfile with that identity.
    SimProfile as_profile() const {
        if (!slots_[active_slot_]) throw InputError("active slot is not programmed");
        return SimProfile(*slots_[active_slot_]);
    }

    AuthResult run_gsm_algorithm(const Challenge& challenge) {
        if (!slots_[active_slot_]) throw InputError("active slot is not programmed");
        ++query_counter_;
        return comp128::comp128v1(slots_[active_slot_]->key, challenge);
    }

private:
    std::array<std::optional<SubscriberIdentity>, kSlots> slots_{};
    std::size_t active_slot_ = 0;
    std::uint64_t query_counter_ = 0;
};

// ---- ISO 7816 APDU framing for the external reader bridge ----------------
//
// GSM 11.11 RUN GSM ALGORITHM under the GSM class byte: the challenge goes
// down with INS 0x88, the 12-byte result comes back via GET RESPONSE. The
// bridge only frames and parses; an actual PC/SC channel is injected by the
// embedder and is absent in this tree.

inline std::vector<std::uint8_t> frame_run_gsm_algorithm(const Challenge& challenge) {
    std::vector<std::uint8_t> apdu = {0xA0, 0x88, 0x00, 0x00, 0x10};
    apdu.insert(apdu.end(), challenge.rand.begin(), challenge.rand.end());
    return apdu;
}

inline std::vector<std::uint8_t> frame_get_response(std::uint8_t length = 12) {
    return {0xA0, 0xC0, 0x00, 0x00, length};
}

// 12 data bytes (SRES || Kc) followed by SW1 SW2 = 90 00.
inline AuthResult parse_auth_response(const std::vector<std::uint8_t>& response) {
    if (response.size() != 14) throw TransportError("expected 12 data bytes + status word");
    if (response[12] != 0x90 || response[13] != 0x00)
        throw TransportError("card returned non-success status word");
    AuthResult out;
    std::copy(response.begin(), response.begin() + 4, out.sres.begin());
    std::copy(response.begin() + 4, response.begin() + 12, out.kc.begin());
    return out;
}

struct AuthQuery {
    Challenge challenge;
};

enum class TransportKind { simulated, external };

// Seam between the attack stack and whatever answers challenges. The
// simulated transport dispatches to an in-process SimProfile; the external
// transport frames APDUs for an injected card channel.
class ReaderTransport {
public:
    using ApduChannel =
        std::function<std::vector<std::uint8_t>(const std::vector<std::uint8_t>&)>;

    static ReaderTransport simulated(SimProfile& card) {
        ReaderTransport t;
        t.kind_ = TransportKind::simulated;
        t.card_ = &card;
        return t;
    }

    static ReaderTransport external(ApduChannel channel = {}) {
        ReaderTransport t;
        t.kind_ = TransportKind::external;
        t.channel_ = std::move(channel);
        return t;
    }

    TransportKind kind() const { return kind_; }

    AuthResult query(const AuthQuery& q) {
        if (kind_ == TransportKind::simulated) {
            return card_->run_gsm_algorithm(q.challenge);
        }
        if (!channel_) throw TransportError("external reader not configured");
        channel_(frame_run_gsm_algorithm(q.challenge));
        return parse_auth_response(channel_(frame_get_response()));
    }

private:
    TransportKind kind_ = TransportKind::simulated;
    SimProfile* card_ = nullptr;
    ApduChannel channel_;
};

// ---- Card profile persistence ---------------------------------------------
//
// Small key-value text format:
//   imsi=901234567890123
//   ki=<32 hex digits>
//   query_counter=<n>
//   counter_limit=<n>|none
//   per_query_latency_us=<n>

inline void save_profile(std::ostream& os, const SimProfile& card) {
    os << "imsi=" << card.identity().imsi << "\n";
    os << "ki=" << hex_encode(card.identity().key.ki.data(), 16) << "\n";
    os << "query_counter=" << card.query_counter() << "\n";
    os << "counter_limit="
       << (card.counter_limit() ? std::to_string(*card.counter_limit()) : std::string("none"))
       << "\n";
    os << "per_query_latency_us=" << card.per_query_latency_us() << "\n";
}

inline SimProfile load_profile(std::istream& is) {
    std::string imsi, ki_hex, line;
    std::optional<std::uint64_t> limit;
    std::uint64_t latency_us = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value", 0);
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "imsi") {
            imsi = value;
        } else if (key == "ki") {
            ki_hex = value;
        } else if (key == "counter_limit") {
            if (value != "none") limit = std::stoull(value);
        } else if (key == "per_query_latency_us") {
            latency_us = std::stoull(value);
        } else if (key != "query_counter") {
            throw ParseError("unknown profile key: " + key, 0);
        }
    }
    auto ki = hex_decode(ki_hex);
    if (ki.size() != 16) throw InputError("ki must be 16 bytes");
    SubscriberIdentity id{imsi, {}};
    std::copy(ki.begin(), ki.end(), id.key.ki.begin());
    return SimProfile(id, limit, latency_us);
}

} // namespace iridlab::sim
