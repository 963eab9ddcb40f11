#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <fstream>
#include <sstream>
#include <string>

#include "iridlab/bits.hpp"
#include "iridlab/comp128.hpp"
#include "iridlab/rng.hpp"

using namespace iridlab;
using namespace iridlab::comp128;

namespace {

SecretKey random_key(Rng& rng) {
    SecretKey k;
    rng.fill_bytes(k.ki.begin(), k.ki.end());
    return k;
}

Challenge random_challenge(Rng& rng) {
    Challenge c;
    rng.fill_bytes(c.rand.begin(), c.rand.end());
    return c;
}

struct Vector {
    SecretKey ki;
    Challenge rand;
    AuthResult expect;
};

// Vector file lines: "<ki hex> <rand hex> <sres hex> <kc hex>".
std::vector<Vector> load_vectors(const std::string& path) {
    std::vector<Vector> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string ki_hex, rand_hex, sres_hex, kc_hex;
        ss >> ki_hex >> rand_hex >> sres_hex >> kc_hex;
        Vector v;
        auto ki = hex_decode(ki_hex), rd = hex_decode(rand_hex);
        auto sr = hex_decode(sres_hex), kc = hex_decode(kc_hex);
        REQUIRE(ki.size() == 16);
        REQUIRE(rd.size() == 16);
        REQUIRE(sr.size() == 4);
        REQUIRE(kc.size() == 8);
        std::copy(ki.begin(), ki.end(), v.ki.ki.begin());
        std::copy(rd.begin(), rd.end(), v.rand.rand.begin());
        std::copy(sr.begin(), sr.end(), v.expect.sres.begin());
        std::copy(kc.begin(), kc.end(), v.expect.kc.begin());
        out.push_back(v);
    }
    return out;
}

} // namespace

TEST_CASE("kc always carries 10 trailing zero bits") {
    Rng rng(0x1001);
    for (int i = 0; i < 2000; ++i) {
        auto out = comp128v1(random_key(rng), random_challenge(rng));
        CHECK(out.kc[7] == 0);
        CHECK((out.kc[6] & 0x03) == 0);
    }
}

TEST_CASE("comp128v1 is deterministic") {
    Rng rng(0x1002);
    auto k = random_key(rng);
    auto c = random_challenge(rng);
    CHECK(comp128v1(k, c) == comp128v1(k, c));
}

TEST_CASE("frozen lab-table vectors") {
    auto vectors = load_vectors(std::string(IRIDLAB_TEST_DATA_DIR) + "/comp128_lab_vectors.txt");
    REQUIRE(vectors.size() >= 32);
    for (const auto& v : vectors) CHECK(comp128v1(v.ki, v.rand) == v.expect);
}

TEST_CASE("butterfly state widths shrink to nibbles") {
    Rng rng(0x1003);
    for (int i = 0; i < 50; ++i) {
        auto k = random_key(rng);
        auto c = random_challenge(rng);
        for (unsigned levels = 1; levels <= 5; ++levels) {
            auto st = butterfly_levels(k, c, 0, levels);
            unsigned width_bound = 1u << (9 - levels);
            for (auto v : st.x) CHECK(v < width_bound);
        }
        auto final5 = butterfly_levels(k, c, 7, 5);
        for (auto v : final5.x) CHECK(v < 16);
    }
}

TEST_CASE("butterfly_levels rejects out-of-range arguments") {
    SecretKey k;
    Challenge c;
    CHECK_THROWS_AS(butterfly_levels(k, c, 8, 3), InputError);
    CHECK_THROWS_AS(butterfly_levels(k, c, 0, 0), InputError);
    CHECK_THROWS_AS(butterfly_levels(k, c, 0, 6), InputError);
}

TEST_CASE("butterfly_levels is deterministic") {
    Rng rng(0x1004);
    auto k = random_key(rng);
    auto c = random_challenge(rng);
    auto a = butterfly_levels(k, c, 3, 4);
    auto b = butterfly_levels(k, c, 3, 4);
    CHECK(a.x == b.x);
}

// The collision attack's premise: after two levels of round 0, challenge
// bytes (i, i+8) influence only lanes {i, i+8, i+16, i+24}.
TEST_CASE("level-2 locality holds for every byte pair") {
    Rng rng(0x1005);
    for (unsigned i = 0; i < 8; ++i) {
        for (int trial = 0; trial < 40; ++trial) {
            auto k = random_key(rng);
            auto c1 = random_challenge(rng);
            auto c2 = c1;
            c2.rand[i] = rng.next_byte();
            c2.rand[i + 8] = rng.next_byte();

            auto s1 = butterfly_levels(k, c1, 0, 2);
            auto s2 = butterfly_levels(k, c2, 0, 2);
            for (unsigned pos = 0; pos < 32; ++pos) {
                bool may_differ = (pos % 8 == i % 8);
                if (!may_differ) CHECK(s1.x[pos] == s2.x[pos]);
            }
        }
    }
}

TEST_CASE("narrow_pipe matches the exposed butterfly state") {
    Rng rng(0x1006);
    for (unsigned i = 0; i < 8; ++i) {
        for (int trial = 0; trial < 25; ++trial) {
            auto k = random_key(rng);
            auto c = random_challenge(rng);
            auto st = butterfly_levels(k, c, 0, 2);
            auto pipe = narrow_pipe(k.ki[i], k.ki[i + 8], c.rand[i], c.rand[i + 8]);
            CHECK(pipe[0] == st.x[i]);
            CHECK(pipe[1] == st.x[i + 8]);
            CHECK(pipe[2] == st.x[i + 16]);
            CHECK(pipe[3] == st.x[i + 24]);
        }
    }
}

TEST_CASE("narrow-pipe equality propagates to full output collisions") {
    // If two challenges differing only at (i, i+8) have equal two-level
    // pipes, the whole hash collides; this is what makes SRES comparison a
    // valid collision signal. Sweeping one varied byte against a fixed
    // partner byte surfaces such pipe collisions offline.
    Rng rng(0x1007);
    int found = 0;
    for (int trial = 0; trial < 60 && found < 8; ++trial) {
        auto k = random_key(rng);
        unsigned i = static_cast<unsigned>(rng.below(8));
        auto base = random_challenge(rng);
        std::array<std::array<std::uint8_t, 4>, 256> pipes;
        for (unsigned u = 0; u < 256; ++u)
            pipes[u] = narrow_pipe(k.ki[i], k.ki[i + 8], static_cast<std::uint8_t>(u),
                                   base.rand[i + 8]);
        for (unsigned u = 0; u < 256 && found < 8; ++u) {
            for (unsigned w = u + 1; w < 256; ++w) {
                if (pipes[u] != pipes[w]) continue;
                auto c1 = base, c2 = base;
                c1.rand[i] = static_cast<std::uint8_t>(u);
                c2.rand[i] = static_cast<std::uint8_t>(w);
                CHECK(comp128v1(k, c1) == comp128v1(k, c2));
                ++found;
                break;
            }
        }
    }
    INFO("narrow-pipe collisions observed: " << found);
    CHECK(found > 0);
}

TEST_CASE("reference-implementation vectors (when recorded)") {
    // Byte-exact vectors recorded from the published implementation can be
    // dropped into this file; the lab table set ships without them.
    auto path = std::string(IRIDLAB_TEST_DATA_DIR) + "/comp128_reference_vectors.txt";
    auto vectors = load_vectors(path);
    if (vectors.empty()) {
        SUCCEED("no recorded reference vectors present");
        return;
    }
    for (const auto& v : vectors) CHECK(comp128v1(v.ki, v.rand) == v.expect);
}
