#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "iridlab/jamming.hpp"
#include "iridlab/rng.hpp"

using namespace iridlab;
using namespace iridlab::jam;

namespace {

// Independent route for P(> 2 errors in 31 trials): sum the upper tail with
// lgamma-derived coefficients instead of the closed three-term complement.
double binomial_tail_ge3(double p) {
    double total = 0.0;
    for (int k = 3; k <= 31; ++k) {
        double log_c = std::lgamma(32.0) - std::lgamma(k + 1.0) - std::lgamma(32.0 - k);
        if (p > 0.0 && p < 1.0)
            total += std::exp(log_c + k * std::log(p) + (31.0 - k) * std::log1p(-p));
    }
    return total;
}

} // namespace

TEST_CASE("erfc matches the frozen high-precision table") {
    std::ifstream in(std::string(IRIDLAB_TEST_DATA_DIR) + "/erfc_reference.txt");
    REQUIRE(in.good());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double x, expected;
        ss >> x >> expected;
        CHECK(std::fabs(jam::erfc(x) - expected) < 1e-13);
        ++rows;
    }
    CHECK(rows >= 25);
}

TEST_CASE("erfc agrees with the C library over a dense grid") {
    for (double x = -6.0; x <= 27.0; x += 0.0173) {
        CHECK(std::fabs(jam::erfc(x) - std::erfc(x)) < 1e-12);
    }
}

TEST_CASE("ber endpoints") {
    CHECK(ber_from_js(JsRatio{1e-6}).p < 1e-10);
    CHECK(ber_from_js(JsRatio{1e12}).p == Catch::Approx(0.5).margin(1e-5));
    // p at 0 dB is erfc(sqrt(1/2))/2; frozen 40-digit evaluation.
    CHECK(ber_from_js(JsRatio{1.0}).p ==
          Catch::Approx(0.1586552539314570514).epsilon(1e-14));
    CHECK_THROWS_AS(ber_from_js(JsRatio{0.0}), InputError);
}

TEST_CASE("block error closed form at the endpoints") {
    CHECK(block_error(BerPoint{0.0}) == 0.0);
    // At p = 1/2 every 31-bit pattern is equally likely: 1 - 497/2^31.
    double expected = 1.0 - 497.0 / 2147483648.0;
    CHECK(block_error(BerPoint{0.5}) == Catch::Approx(expected).epsilon(1e-15));
    CHECK_THROWS_AS(block_error(BerPoint{0.7}), InputError);
}

TEST_CASE("block error cross-checked against the binomial tail") {
    for (double p : {0.001, 0.01, 0.05, 0.1, 0.2, 0.35, 0.5}) {
        CHECK(block_error(BerPoint{p}) ==
              Catch::Approx(binomial_tail_ge3(p)).margin(1e-12));
    }
}

TEST_CASE("prr endpoints and monotonicity") {
    CHECK(prr(JsRatio{1e-8}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(prr(JsRatio{1e6}) < 1e-9);
    double prev = 1.1;
    for (double db = -20.0; db <= 10.0; db += 0.25) {
        double v = prr(JsRatio::from_db(db));
        CHECK(v <= prev + 1e-12); // ulp jitter in the flat region near 1

        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
}

TEST_CASE("the 50% crossing is computed and compared against -2.93 dB") {
    // The chain as published crosses PRR = 0.5 at -4.2874 dB, not at the
    // -2.93 dB the source figure reads off. Both numbers are reported by
    // the tooling; this pins the computed value and the size of the gap.
    auto js50 = js_for_prr(0.5);
    CHECK(js50.db() == Catch::Approx(-4.28737295852503).margin(1e-6));
    CHECK(js50.value == Catch::Approx(0.37261703363964833).epsilon(1e-9));
    double prr_at_paper_point = prr(JsRatio::from_db(-2.93));
    CHECK(prr_at_paper_point == Catch::Approx(0.15660084050543508).margin(1e-9));
}

TEST_CASE("inverse solver round-trips") {
    for (double target : {0.1, 0.5, 0.9}) {
        auto js = js_for_prr(target);
        CHECK(prr(js) == Catch::Approx(target).margin(1e-9));
    }
    CHECK(js_for_prr(0.99).value < js_for_prr(0.5).value);
    CHECK_THROWS_AS(js_for_prr(0.0), InputError);
    CHECK_THROWS_AS(js_for_prr(1.0), InputError);
}

TEST_CASE("monte carlo agrees with the analytic chain") {
    CHECK(monte_carlo_prr(JsRatio{1e-8}, 10000, 1) == 1.0);
    CHECK_THROWS_AS(monte_carlo_prr(JsRatio{1.0}, 9999, 1), InputError);

    double analytic = prr(JsRatio{1.0});
    double empirical = monte_carlo_prr(JsRatio{1.0}, 100000, 42);
    double sigma = std::sqrt(analytic * (1.0 - analytic) / 100000.0);
    CHECK(std::fabs(empirical - analytic) < 3.0 * sigma);

    CHECK(monte_carlo_prr(JsRatio{1.0}, 20000, 7) == monte_carlo_prr(JsRatio{1.0}, 20000, 7));
    CHECK(monte_carlo_prr(JsRatio{1.0}, 20000, 7) != monte_carlo_prr(JsRatio{1.0}, 20000, 8));
}

TEST_CASE("analytic/empirical agreement across the attack band") {
    for (double db = -10.0; db <= 5.0; db += 3.0) {
        double analytic = prr(JsRatio::from_db(db));
        double empirical = monte_carlo_prr(JsRatio::from_db(db), 30000,
                                           static_cast<std::uint64_t>((db + 100) * 100));
        double sigma = std::sqrt(std::max(analytic * (1.0 - analytic), 1e-9) / 30000.0);
        CHECK(std::fabs(empirical - analytic) < std::max(3.0 * sigma, 2e-4));
    }
}

TEST_CASE("free-space link budget") {
    // Doubling the distance costs 20 log10(2) = 6.02 dB.
    LinkBudget near_budget{-120.0, 0.0, 1000.0, 1626250000.0};
    LinkBudget far_budget = near_budget;
    far_budget.distance_m = 2000.0;
    CHECK(js_from_link_budget(near_budget).db() - js_from_link_budget(far_budget).db() ==
          Catch::Approx(6.0205999).margin(1e-4));

    // 0 dBm jammer at 1 km against a -120 dBm signal: FSPL = 96.674 dB,
    // J/S = +23.33 dB. Jamming wins by a wide margin.
    CHECK(free_space_path_loss_db(1000.0, 1626250000.0) ==
          Catch::Approx(96.67374619139285).margin(1e-9));
    CHECK(js_from_link_budget(near_budget).db() ==
          Catch::Approx(23.32625380860715).margin(1e-9));

    CHECK_THROWS_AS(free_space_path_loss_db(0.0, 1626250000.0), InputError);
}

TEST_CASE("probability outputs stay in bounds under fuzzing") {
    Rng rng(0x4001);
    for (int t = 0; t < 5000; ++t) {
        double db = -60.0 + 120.0 * rng.uniform();
        auto js = JsRatio::from_db(db);
        double p = ber_from_js(js).p;
        CHECK(p >= 0.0);
        CHECK(p <= 0.5);
        double pb = block_error(BerPoint{p});
        CHECK(pb >= 0.0);
        CHECK(pb <= 1.0);
        double v = prr(js);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
