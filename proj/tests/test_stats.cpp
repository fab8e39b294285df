#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "entlink/stats.hpp"
#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stats = entlink::stats;

TEST_CASE("log_binomial reproduces small exact coefficients") {
    CHECK(std::exp(stats::log_binomial(10, 3)) == doctest::Approx(120.0).epsilon(1e-12));
    CHECK(std::exp(stats::log_binomial(52, 5)) ==
          doctest::Approx(2598960.0).epsilon(1e-11));
    CHECK(stats::log_binomial(7, 0) == doctest::Approx(0.0));
    CHECK(stats::log_binomial(7, 7) == doctest::Approx(0.0));
}

TEST_CASE("binomial_pmf matches direct evaluation and sums to one") {
    CHECK(stats::binomial_pmf(10, 4, 0.3) ==
          doctest::Approx(210 * std::pow(0.3, 4) * std::pow(0.7, 6)).epsilon(1e-12));
    double total = 0.0;
    for (long k = 0; k <= 25; ++k) total += stats::binomial_pmf(25, k, 0.37);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats::binomial_pmf(5, 0, 0.0) == doctest::Approx(1.0));
    CHECK(stats::binomial_pmf(5, 5, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("symmetric_difference_tail agrees with the exact Pascal-row oracle") {
    for (long n : {1L, 4L, 7L, 16L, 31L, 40L}) {
        for (long t = 0; t <= n + 1; ++t) {
            CHECK(stats::symmetric_difference_tail(n, t) ==
                  doctest::Approx(oracles::pascal_symmetric_tail(n, t)).epsilon(1e-13));
        }
    }
    CHECK(stats::symmetric_difference_tail(301, 0) == 1.0);
}

TEST_CASE("symmetric_difference_tail reproduces frozen large-n references") {
    // Reference values computed with exact rational arithmetic (Python
    // fractions) for the channel's 3m+1-photon bit-1 branch at the default
    // threshold ceil((m+1)/2).
    CHECK(stats::symmetric_difference_tail(76, 13) ==
          doctest::Approx(0.135385105299431).epsilon(1e-12));
    CHECK(stats::symmetric_difference_tail(301, 51) ==
          doctest::Approx(0.00387898963752378).epsilon(1e-12));
    CHECK(stats::symmetric_difference_tail(1201, 201) ==
          doctest::Approx(7.2872843555325e-09).epsilon(1e-9));
}

TEST_CASE("wilson_interval matches frozen references and brackets the estimate") {
    const auto ci = stats::wilson_interval(3, 10);
    CHECK(ci.low == doctest::Approx(0.10779126740630099).epsilon(1e-12));
    CHECK(ci.high == doctest::Approx(0.6032218525388546).epsilon(1e-12));

    const auto zero = stats::wilson_interval(0, 10);
    CHECK(zero.low == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(zero.high == doctest::Approx(0.2775327998628892).epsilon(1e-12));

    const auto all = stats::wilson_interval(10, 10);
    CHECK(all.high == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(all.low == doctest::Approx(1.0 - 0.2775327998628892).epsilon(1e-12));

    for (long k : {0L, 1L, 5L, 9L, 10L}) {
        const auto band = stats::wilson_interval(k, 10);
        const double p_hat = static_cast<double>(k) / 10.0;
        CHECK(band.low <= p_hat + 1e-15);
        CHECK(band.high >= p_hat - 1e-15);
        CHECK(band.low >= 0.0);
        CHECK(band.high <= 1.0);
    }
}

TEST_CASE("entropies evaluate closed forms") {
    CHECK(stats::binary_entropy_bits(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(stats::binary_entropy_bits(0.0) == doctest::Approx(0.0));
    CHECK(stats::binary_entropy_bits(1.0) == doctest::Approx(0.0));
    // 1 - H2(0.11) = 0.500084041835472: the capacity oracle used elsewhere.
    CHECK(stats::binary_entropy_bits(0.11) ==
          doctest::Approx(1.0 - 0.500084041835472).epsilon(1e-12));
    CHECK(stats::binary_entropy_bits(0.25) ==
          doctest::Approx(1.0 - 0.188721875540867).epsilon(1e-12));

    const std::vector<double> uniform4{1.0, 1.0, 1.0, 1.0};
    CHECK(stats::entropy_bits(uniform4) == doctest::Approx(2.0).epsilon(1e-12));
    const std::vector<double> with_zeros{0.5, 0.0, 0.5, 0.0};
    CHECK(stats::entropy_bits(with_zeros) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("total_variation and jensen_shannon behave as distances") {
    const std::vector<double> p{0.5, 0.5, 0.0};
    const std::vector<double> q{0.0, 0.0, 1.0};
    CHECK(stats::total_variation(p, p) == doctest::Approx(0.0));
    CHECK(stats::total_variation(p, q) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(stats::jensen_shannon_bits(p, p) == doctest::Approx(0.0).epsilon(1e-12));
    // Disjoint supports: one full bit of selector information.
    CHECK(stats::jensen_shannon_bits(p, q) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> r{0.3, 0.3, 0.4};
    CHECK(stats::jensen_shannon_bits(p, r) ==
          doctest::Approx(stats::jensen_shannon_bits(r, p)).epsilon(1e-13));
    CHECK(stats::jensen_shannon_bits(p, r) >= 0.0);
    CHECK(stats::jensen_shannon_bits(p, r) <= 1.0);

    // Hand-evaluated two-point case: p=(1,0), q=(1/2,1/2);
    // JSD = H2(3/4) - 1/2 = 0.311278124459133 - ... evaluated directly.
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{0.5, 0.5};
    const double expected = stats::binary_entropy_bits(0.75) - 0.5;
    CHECK(stats::jensen_shannon_bits(a, b) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mi_plugin_bits evaluates exact joint tables") {
    const std::vector<std::vector<double>> independent{{0.25, 0.25}, {0.25, 0.25}};
    CHECK(stats::mi_plugin_bits(independent) == doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<std::vector<double>> identity{{0.5, 0.0}, {0.0, 0.5}};
    CHECK(stats::mi_plugin_bits(identity) == doctest::Approx(1.0).epsilon(1e-12));

    // BSC(0.25) with uniform input: I = 1 - H2(0.25).
    const std::vector<std::vector<double>> bsc{{0.375, 0.125}, {0.125, 0.375}};
    CHECK(stats::mi_plugin_bits(bsc) ==
          doctest::Approx(0.188721875540867).epsilon(1e-12));
}

TEST_CASE("miller-madow correction stays within information bounds") {
    // Independent counts: plug-in bias is positive, the corrected value must
    // sit at (or clamp to) zero.
    const std::vector<std::vector<long>> balanced{{25, 25}, {25, 25}};
    CHECK(stats::mi_miller_madow_bits(balanced) == doctest::Approx(0.0));

    // Deterministic table: the raw correction would overshoot above 1 bit;
    // the estimate must stay below both marginal entropies.
    const std::vector<std::vector<long>> diagonal{{50, 0}, {0, 50}};
    const double mi = stats::mi_miller_madow_bits(diagonal);
    CHECK(mi <= 1.0 + 1e-15);
    CHECK(mi == doctest::Approx(1.0).epsilon(1e-12));

    // Skewed deterministic table: bounded by H(X) = H2(0.2) < 1.
    const std::vector<std::vector<long>> skewed{{20, 0}, {0, 80}};
    CHECK(stats::mi_miller_madow_bits(skewed) <=
          stats::binary_entropy_bits(0.2) + 1e-12);

    // A noisy table: correction is negative, result below plug-in.
    const std::vector<std::vector<long>> noisy{{40, 10}, {12, 38}};
    const std::vector<std::vector<double>> noisy_real{{40.0, 10.0}, {12.0, 38.0}};
    CHECK(stats::mi_miller_madow_bits(noisy) < stats::mi_plugin_bits(noisy_real));
    CHECK(stats::mi_miller_madow_bits(noisy) >= 0.0);

    const std::vector<std::vector<long>> empty_table{{0, 0}, {0, 0}};
    CHECK_THROWS_AS(stats::mi_miller_madow_bits(empty_table), std::invalid_argument);
}

TEST_CASE("fit_line recovers exact affine data") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    std::vector<double> y;
    for (double xi : x) y.push_back(-0.75 * xi + 2.5);
    const auto fit = stats::fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(2.5).epsilon(1e-13));

    const std::vector<double> xx{1.0, 1.0};
    const std::vector<double> yy{0.0, 1.0};
    CHECK_THROWS_AS(stats::fit_line(xx, yy), std::invalid_argument);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(stats::fit_line(one, one), std::invalid_argument);
}
