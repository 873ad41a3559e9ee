#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "mbstat/errors.hpp"
#include "mbstat/moments.hpp"
#include "mbstat/tick.hpp"

namespace mbstat {

// One trade linked to the price a time shift tau in the past:
// current value C = p(t) U, original value C_o = p(t - tau) U, and the
// anticipated return r = C / C_o (identically p(t) / p(t - tau)).
struct ShiftedTradePair {
    double time = 0.0;
    double shift = 0.0;
    double current_value = 0.0;
    double original_value = 0.0;
    double anticipated_return = 0.0;
};

// Market-based statistics of anticipated returns over one window and shift.
struct ReturnStats {
    std::size_t count = 0;
    double mean = 0.0;                      // h(t, tau; 1)
    double second_moment = 0.0;             // h(t, tau; 2)
    double volatility = 0.0;                // sigma^2(t, tau)
    double current_value_volatility = 0.0;  // Omega_C^2(t)
    double past_value_volatility = 0.0;     // Phi^2(t, tau)
    double current_past_cov = 0.0;          // corr{C(t_i) C_o(t_i, tau)}

    double direct_volatility = 0.0;
    double weighted_mean = 0.0;
};

// Last-observation price lookup over the whole trade history. The paper
// assumes an exact trade exists at t - tau; real series do not, so the
// price of the latest trade at or before the requested time is used.
class PriceHistory {
public:
    static PriceHistory from_ticks(std::span<const TradeTick> ticks) {
        PriceHistory h;
        h.times_.reserve(ticks.size());
        h.prices_.reserve(ticks.size());
        for (const auto& t : ticks) {
            h.times_.push_back(t.time);
            h.prices_.push_back(t.price);
        }
        for (std::size_t i = 1; i < h.times_.size(); ++i) {
            if (h.times_[i] < h.times_[i - 1])
                throw DomainError("ticks are not time-ordered");
        }
        return h;
    }

    double price_at_or_before(double t) const {
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        if (it == times_.begin()) throw MissingPastPrice(t);
        return prices_[static_cast<std::size_t>(it - times_.begin()) - 1];
    }

    bool empty() const { return times_.empty(); }

private:
    std::vector<double> times_;
    std::vector<double> prices_;
};

inline std::vector<ShiftedTradePair> build_shifted_pairs(std::span<const TradeTick> ticks,
                                                         double shift,
                                                         const PriceHistory& history) {
    if (shift < 0.0) throw DomainError("time shift must be non-negative");
    std::vector<ShiftedTradePair> pairs;
    pairs.reserve(ticks.size());
    for (const auto& t : ticks) {
        const double past_price = history.price_at_or_before(t.time - shift);
        const double original = past_price * t.volume;
        pairs.push_back(ShiftedTradePair{t.time, shift, t.value, original, t.value / original});
    }
    return pairs;
}

// Original-value weight functions z(t, tau; m) = C_o_i^m / sum C_o_j^m.
inline std::vector<double> weight_fn_original_value(std::span<const ShiftedTradePair> pairs, int m) {
    if (pairs.empty()) throw DomainError("empty series");
    std::vector<double> originals;
    originals.reserve(pairs.size());
    for (const auto& p : pairs) originals.push_back(p.original_value);
    return power_weights(originals, m);
}

inline ReturnStats compute_return_stats(std::span<const ShiftedTradePair> pairs) {
    if (pairs.empty()) throw DomainError("empty series");
    std::vector<double> r, current, original;
    r.reserve(pairs.size());
    current.reserve(pairs.size());
    original.reserve(pairs.size());
    for (const auto& p : pairs) {
        r.push_back(p.anticipated_return);
        current.push_back(p.current_value);
        original.push_back(p.original_value);
    }
    const MarketStats s = market_based_stats(r, current, original);

    ReturnStats out;
    out.count = s.count;
    out.mean = s.mean;
    out.second_moment = s.second_moment;
    out.volatility = s.volatility;
    out.current_value_volatility = s.current_volatility;
    out.past_value_volatility = s.base_volatility;
    out.current_past_cov = s.cross_cov;
    out.direct_volatility = s.direct_volatility;
    out.weighted_mean = s.weighted_mean;
    return out;
}

// h(t, tau; 1), Markowitz's portfolio return of the window's trades.
inline double mean_return(std::span<const ShiftedTradePair> pairs) {
    return compute_return_stats(pairs).mean;
}

inline double return_second_moment(std::span<const ShiftedTradePair> pairs) {
    return compute_return_stats(pairs).second_moment;
}

inline double return_volatility(std::span<const ShiftedTradePair> pairs) {
    return compute_return_stats(pairs).volatility;
}

}  // namespace mbstat
