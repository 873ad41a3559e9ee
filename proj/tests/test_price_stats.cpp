#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "mbstat/price_stats.hpp"
#include "oracles.hpp"

using Catch::Approx;
using namespace mbstat;

namespace {

std::vector<TradeTick> ticks_from(const std::vector<double>& prices,
                                  const std::vector<double>& volumes) {
    std::vector<TradeTick> ticks;
    for (std::size_t i = 0; i < prices.size(); ++i)
        ticks.push_back(make_tick(static_cast<double>(i + 1), "a", Side::Buy, prices[i], volumes[i]));
    return ticks;
}

PriceStats stats_of(const std::vector<double>& prices, const std::vector<double>& volumes) {
    const auto ticks = ticks_from(prices, volumes);
    return compute_price_stats(window_of(ticks));
}

double vwap_of(const std::vector<double>& prices, const std::vector<double>& volumes) {
    const auto ticks = ticks_from(prices, volumes);
    return vwap(window_of(ticks));
}

double wpm_of(const std::vector<double>& prices, const std::vector<double>& volumes, int n, int m) {
    const auto ticks = ticks_from(prices, volumes);
    return weighted_price_moment(window_of(ticks), n, m);
}

std::vector<double> weights_of(const std::vector<double>& volumes, int m) {
    std::vector<double> prices(volumes.size(), 1.0);
    const auto ticks = ticks_from(prices, volumes);
    return weight_fn_volume(window_of(ticks), m);
}

struct RandomWindow {
    std::vector<double> prices;
    std::vector<double> volumes;
};

RandomWindow random_window(std::mt19937_64& gen, std::size_t min_n = 2, std::size_t max_n = 200) {
    auto u01 = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    const std::size_t n = min_n + gen() % (max_n - min_n + 1);
    RandomWindow w;
    const double base = 1.0 + 200.0 * u01();
    const double sigma = 0.01 + 0.5 * u01();
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (u01() + u01() + u01() + u01() - 2.0) * std::sqrt(3.0);
        w.prices.push_back(base * std::exp(sigma * z));
        w.volumes.push_back(1.0 + 5000.0 * u01() * u01());
    }
    return w;
}

}  // namespace

TEST_CASE("weight_fn_volume") {
    for (double w : weights_of({1, 1, 1, 1}, 1)) REQUIRE(w == Approx(0.25));

    const auto w1 = weights_of({1, 3}, 1);
    REQUIRE(w1[0] == Approx(0.25));
    REQUIRE(w1[1] == Approx(0.75));
    const auto w2 = weights_of({1, 3}, 2);
    REQUIRE(w2[0] == Approx(0.1));
    REQUIRE(w2[1] == Approx(0.9));

    REQUIRE_THROWS_AS(weights_of({1, 3}, 5), DomainError);
    REQUIRE_THROWS_AS(weights_of({1, 3}, 0), DomainError);
}

TEST_CASE("weighted_price_moment") {
    REQUIRE(wpm_of({10, 20}, {1, 3}, 1, 1) == Approx(17.5));
    REQUIRE(wpm_of({10, 20}, {1, 1}, 1, 1) == Approx(15.0));

    for (int n = 1; n <= 4; ++n)
        for (int m = 1; m <= 4; ++m)
            REQUIRE(wpm_of({7, 7, 7}, {2, 9, 4}, n, m) == Approx(ipow(7.0, n)));

    REQUIRE_THROWS_AS(wpm_of({10, 20}, {1, 3}, 5, 1), DomainError);
}

TEST_CASE("vwap") {
    REQUIRE(vwap_of({10, 20}, {1, 3}) == Approx(17.5));
    REQUIRE(vwap_of({5, 5, 5}, {7, 1, 2}) == Approx(5.0));
    REQUIRE(vwap_of({8}, {2}) == Approx(8.0));
}

TEST_CASE("price second moment and volatility on the worked example") {
    const auto s = stats_of({10, 20}, {1, 3});
    REQUIRE(s.volatility == Approx(11.25));
    REQUIRE(s.second_moment == Approx(317.5));

    const auto constant = stats_of({6, 6, 6}, {1, 5, 2});
    REQUIRE(constant.volatility == 0.0);
    REQUIRE(constant.second_moment == Approx(36.0));

    const auto single = stats_of({9}, {2});
    REQUIRE(single.second_moment == Approx(81.0).epsilon(1e-12));
    REQUIRE(single.volatility == 0.0);
}

TEST_CASE("partial windows are ineligible") {
    const auto ticks = ticks_from({10, 20, 30}, {1, 1, 1});
    const auto windows = partition_windows(ticks, 5);
    REQUIRE_FALSE(windows[0].full);
    REQUIRE_THROWS_AS(compute_price_stats(windows[0]), DomainError);
    REQUIRE_THROWS_AS(vwap(windows[0]), DomainError);
}

TEST_CASE("decomposed price volatility equals the direct weighted oracle") {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto rw = random_window(gen);
        const PriceStats s = stats_of(rw.prices, rw.volumes);

        REQUIRE(s.volatility >= 0.0);
        const double direct = oracle::direct_weighted_variance(rw.prices, rw.volumes, s.mean);
        REQUIRE(oracle::rel_delta(s.volatility, direct, s.mean) <= 1e-9);
        REQUIRE(oracle::rel_delta(s.second_moment, s.mean * s.mean + s.volatility, s.mean) <= 1e-9);
        REQUIRE(s.mean == Approx(oracle::weighted_mean(rw.prices, rw.volumes)).epsilon(1e-12));
    }
}

TEST_CASE("scale covariance") {
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 300; ++trial) {
        const auto rw = random_window(gen, 2, 60);
        const PriceStats s = stats_of(rw.prices, rw.volumes);

        const double lambda = 3.0;
        std::vector<double> scaled_prices = rw.prices;
        for (double& p : scaled_prices) p *= lambda;
        const PriceStats sp = stats_of(scaled_prices, rw.volumes);
        REQUIRE(sp.mean == Approx(lambda * s.mean).epsilon(1e-10));
        REQUIRE(oracle::rel_delta(sp.volatility, lambda * lambda * s.volatility, sp.mean) <= 1e-10);

        std::vector<double> scaled_volumes = rw.volumes;
        for (double& v : scaled_volumes) v *= lambda;
        const PriceStats sv = stats_of(rw.prices, scaled_volumes);
        REQUIRE(sv.mean == Approx(s.mean).epsilon(1e-10));
        REQUIRE(oracle::rel_delta(sv.volatility, s.volatility, sv.mean) <= 1e-10);
    }
}

TEST_CASE("equal volumes reduce to unweighted statistics") {
    std::mt19937_64 gen(47);
    for (int trial = 0; trial < 300; ++trial) {
        auto rw = random_window(gen, 2, 60);
        std::fill(rw.volumes.begin(), rw.volumes.end(), 13.0);
        const PriceStats s = stats_of(rw.prices, rw.volumes);
        REQUIRE(s.mean == Approx(oracle::freq_moment(rw.prices, 1)).epsilon(1e-10));
        REQUIRE(oracle::rel_delta(s.volatility, oracle::freq_variance(rw.prices), s.mean) <= 1e-9);
    }
}
