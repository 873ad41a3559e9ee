#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mbstat/errors.hpp"
#include "mbstat/moments.hpp"
#include "mbstat/tick.hpp"

namespace mbstat {

// Market-based price statistics of one full trading-day window: VWAP, the
// decomposed second moment and volatility, and the trade value/volume
// ingredients they are built from.
struct PriceStats {
    std::size_t count = 0;
    double mean = 0.0;               // a(t;1), VWAP
    double second_moment = 0.0;      // a(t;2)
    double volatility = 0.0;         // sigma^2(t)
    double value_volatility = 0.0;   // Omega_C^2(t)
    double volume_volatility = 0.0;  // Omega_U^2(t)
    double value_volume_cov = 0.0;   // corr{C(t_i) U(t_i)}

    // Direct weighted-sum routes, kept for oracle mode.
    double direct_volatility = 0.0;  // sum (p - a)^2 U^2 / sum U^2
    double weighted_mean = 0.0;      // sum p U / sum U
};

// Orders above this are outside the paper's scope and almost certainly a
// caller bug, so the public price interface rejects them.
inline constexpr int kMaxPriceOrder = 4;

namespace detail {

inline void require_full(const TradingDayWindow& w) {
    if (!w.full) throw DomainError("partial window is ineligible for statistics");
    if (w.ticks.empty()) throw DomainError("empty window");
}

inline void require_order(int n, const char* what) {
    if (n < 1 || n > kMaxPriceOrder)
        throw DomainError(std::string(what) + " must be in [1, 4]");
}

}  // namespace detail

// Volume weight functions w(t_i; m) = U_i^m / sum U_j^m.
inline std::vector<double> weight_fn_volume(const TradingDayWindow& w, int m) {
    detail::require_full(w);
    detail::require_order(m, "weight order m");
    std::vector<double> volumes;
    volumes.reserve(w.size());
    for (const auto& t : w.ticks) volumes.push_back(t.volume);
    return power_weights(volumes, m);
}

// Generalized VWAP p(t; n, m) = sum p_i^n w(t_i; m).
inline double weighted_price_moment(const TradingDayWindow& w, int n, int m) {
    detail::require_order(n, "price moment order n");
    const auto weights = weight_fn_volume(w, m);
    KahanSum acc;
    for (std::size_t i = 0; i < weights.size(); ++i)
        acc.add(ipow(w.ticks[i].price, n) * weights[i]);
    return acc.value();
}

// Market-based average price a(t;1) = sum C_i / sum U_i.
inline double vwap(const TradingDayWindow& w) {
    detail::require_full(w);
    ExtSum value, volume;
    for (const auto& t : w.ticks) {
        value.add(t.value);
        volume.add(t.volume);
    }
    return static_cast<double>(value.value() / volume.value());
}

inline PriceStats compute_price_stats(const TradingDayWindow& w) {
    detail::require_full(w);
    std::vector<double> prices, values, volumes;
    prices.reserve(w.size());
    values.reserve(w.size());
    volumes.reserve(w.size());
    for (const auto& t : w.ticks) {
        prices.push_back(t.price);
        values.push_back(t.value);
        volumes.push_back(t.volume);
    }
    // The price equation C = p U has exactly the shape of the return
    // equation C = r C_o, so the shared engine applies with p as the
    // "return" and U as the weight base.
    const MarketStats s = market_based_stats(prices, values, volumes);

    PriceStats out;
    out.count = s.count;
    out.mean = s.mean;
    out.second_moment = s.second_moment;
    out.volatility = s.volatility;
    out.value_volatility = s.current_volatility;
    out.volume_volatility = s.base_volatility;
    out.value_volume_cov = s.cross_cov;
    out.direct_volatility = s.direct_volatility;
    out.weighted_mean = s.weighted_mean;
    return out;
}

// a(t;2), the decomposed second price moment.
inline double price_second_moment(const TradingDayWindow& w) {
    return compute_price_stats(w).second_moment;
}

// sigma^2(t), the decomposed price volatility.
inline double price_volatility(const TradingDayWindow& w) {
    return compute_price_stats(w).volatility;
}

}  // namespace mbstat
