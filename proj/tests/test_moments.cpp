#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "mbstat/moments.hpp"
#include "oracles.hpp"

using Catch::Approx;
using namespace mbstat;

namespace {

std::vector<double> random_series(std::mt19937_64& gen, std::size_t n, double lo, double hi) {
    std::vector<double> xs(n);
    for (auto& x : xs) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        x = lo + (hi - lo) * u;
    }
    return xs;
}

}  // namespace

TEST_CASE("raw_moment basics") {
    const std::vector<double> s123 = {1.0, 2.0, 3.0};
    REQUIRE(raw_moment(s123, 1) == Approx(2.0));
    REQUIRE(raw_moment(s123, 2) == Approx(14.0 / 3.0));

    const std::vector<double> fives = {5.0, 5.0, 5.0, 5.0};
    REQUIRE(raw_moment(fives, 3) == Approx(125.0));

    REQUIRE_THROWS_AS(raw_moment(std::vector<double>{}, 1), DomainError);
    REQUIRE_THROWS_AS(raw_moment(s123, 0), DomainError);
}

TEST_CASE("raw_moment of a constant series is c^n") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 200; ++trial) {
        const double c = 0.1 + 100.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
        const std::size_t n = 1 + gen() % 50;
        const std::vector<double> xs(n, c);
        for (int order = 1; order <= 4; ++order) {
            const double expected = ipow(c, order);
            REQUIRE(raw_moment(xs, order) == Approx(expected).epsilon(1e-14));
        }
    }
}

TEST_CASE("variance basics") {
    REQUIRE(variance(std::vector<double>{7.0, 7.0, 7.0}) == 0.0);
    REQUIRE(variance(std::vector<double>{1.0, 3.0}) == Approx(1.0));
    REQUIRE(variance(std::vector<double>{10.0, 20.0, 30.0}) == Approx(200.0 / 3.0));
    REQUIRE_THROWS_AS(variance(std::vector<double>{}), DomainError);
}

TEST_CASE("variance is non-negative and matches the oracle") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto xs = random_series(gen, 1 + gen() % 100, -50.0, 50.0);
        const double v = variance(xs);
        REQUIRE(v >= 0.0);
        REQUIRE(v == Approx(oracle::freq_variance(xs)).margin(1e-9));
    }
}

TEST_CASE("variance clamp distinguishes noise from bugs") {
    REQUIRE(checked_variance(-1e-13, 1.0) == 0.0);
    REQUIRE(checked_variance(0.0, 1.0) == 0.0);
    REQUIRE(checked_variance(2.5, 1.0) == 2.5);
    REQUIRE_THROWS_AS(checked_variance(-1e-6, 1.0), DomainError);
    // The noise band scales with the squared magnitude of the series.
    REQUIRE(checked_variance(-1e-8, 1e4) == 0.0);
    REQUIRE_THROWS_AS(checked_variance(-1.0, 1e4), DomainError);
}

TEST_CASE("covariance basics") {
    const std::vector<double> a = {1.0, 2.0};
    REQUIRE(covariance(a, a) == Approx(0.25));

    const std::vector<double> c = {3.0, 3.0, 3.0};
    const std::vector<double> y = {1.0, -4.0, 9.0};
    REQUIRE(covariance(c, y) == Approx(0.0).margin(1e-12));

    const std::vector<double> xs = {1.0, -1.0};
    const std::vector<double> ys = {-1.0, 1.0};
    REQUIRE(covariance(xs, ys) == Approx(-1.0));

    REQUIRE_THROWS_AS(covariance(a, c), DomainError);
    REQUIRE_THROWS_AS(covariance(std::vector<double>{}, std::vector<double>{}), DomainError);
}

TEST_CASE("covariance of a series with itself is its variance") {
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 500; ++trial) {
        const auto xs = random_series(gen, 1 + gen() % 64, -10.0, 90.0);
        const double v = variance(xs);
        const double cv = covariance(xs, xs);
        REQUIRE(std::abs(cv - v) <= 1e-12 * std::max(1.0, std::abs(v)));
    }
}

TEST_CASE("MomentSet is internally consistent") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto xs = random_series(gen, 2 + gen() % 40, 0.5, 20.0);
        const auto ms = compute_moments(xs, 4);
        REQUIRE(ms.count == xs.size());
        REQUIRE(ms.variance >= 0.0);
        const double recon = ms.moment(2) - ms.moment(1) * ms.moment(1);
        REQUIRE(std::abs(ms.variance - recon) <=
                1e-12 * std::max(1.0, std::abs(ms.variance)));
    }
    REQUIRE_THROWS_AS(compute_moments(std::vector<double>{}, 2), DomainError);
    REQUIRE_THROWS_AS(compute_moments(std::vector<double>{1.0}, 2).moment(5), DomainError);
}

TEST_CASE("power_weights normalize") {
    const std::vector<double> xs = {1.0, 3.0};
    const auto w1 = power_weights(xs, 1);
    REQUIRE(w1[0] == Approx(0.25));
    REQUIRE(w1[1] == Approx(0.75));
    const auto w2 = power_weights(xs, 2);
    REQUIRE(w2[0] == Approx(0.1));
    REQUIRE(w2[1] == Approx(0.9));

    std::mt19937_64 gen(19);
    for (int trial = 0; trial < 300; ++trial) {
        const auto ys = random_series(gen, 1 + gen() % 80, 0.01, 1000.0);
        for (int m = 1; m <= 3; ++m) {
            const auto w = power_weights(ys, m);
            double total = 0.0;
            for (double x : w) total += x;
            REQUIRE(std::abs(total - 1.0) <= 1e-12);
        }
    }

    REQUIRE_THROWS_AS(power_weights(std::vector<double>{1.0, 0.0}, 1), DomainError);
    REQUIRE_THROWS_AS(power_weights(std::vector<double>{}, 1), DomainError);
}

TEST_CASE("market_based_stats: dual routes agree and moments are consistent") {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + gen() % 120;
        std::vector<double> r(n), cur(n), base(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u1 = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            const double u2 = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            base[i] = 1.0 + 500.0 * u1;
            r[i] = 0.5 + 1.2 * u2;
            cur[i] = r[i] * base[i];
        }
        const MarketStats s = market_based_stats(r, cur, base);

        REQUIRE(s.volatility >= 0.0);
        REQUIRE(oracle::rel_delta(s.volatility, s.direct_volatility, s.mean) <= 1e-9);
        REQUIRE(oracle::rel_delta(s.volatility, oracle::direct_weighted_variance(r, base, s.mean),
                                  s.mean) <= 1e-9);
        REQUIRE(oracle::rel_delta(s.second_moment, s.mean * s.mean + s.volatility, s.mean) <= 1e-9);
        REQUIRE(s.mean == Approx(oracle::ratio_mean(cur, base)).epsilon(1e-12));
    }
}

TEST_CASE("market_based_stats: single element degenerates exactly") {
    const std::vector<double> r = {1.25};
    const std::vector<double> cur = {125.0};
    const std::vector<double> base = {100.0};
    const MarketStats s = market_based_stats(r, cur, base);
    REQUIRE(s.mean == 1.25);
    REQUIRE(s.volatility == 0.0);
    REQUIRE(s.direct_volatility == 0.0);
    REQUIRE(s.second_moment == Approx(1.25 * 1.25).epsilon(1e-12));
}

TEST_CASE("market_based_stats rejects bad input") {
    const std::vector<double> one = {1.0};
    REQUIRE_THROWS_AS(market_based_stats({}, {}, {}), DomainError);
    REQUIRE_THROWS_AS(market_based_stats(one, one, std::vector<double>{0.0}), DomainError);
    REQUIRE_THROWS_AS(market_based_stats(one, std::vector<double>{1.0, 2.0}, one), DomainError);
}
