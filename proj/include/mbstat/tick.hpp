#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mbstat/errors.hpp"

namespace mbstat {

enum class Side { Buy, Sell };

// One market trade. `value` always satisfies value = price * volume; the
// optional adjustment factor is folded into the price at construction.
struct TradeTick {
    double time = 0.0;
    std::string investor_id;
    Side side = Side::Buy;
    double price = 0.0;
    double volume = 0.0;
    double value = 0.0;
};

inline TradeTick make_tick(double time, std::string investor_id, Side side,
                           double price, double volume, double adjust = 1.0) {
    if (!(price > 0.0)) throw DomainError("price must be strictly positive");
    if (!(volume > 0.0)) throw DomainError("volume must be strictly positive");
    if (!(adjust > 0.0)) throw DomainError("adjustment factor must be strictly positive");
    const double adjusted = price * adjust;
    return TradeTick{time, std::move(investor_id), side, adjusted, volume, adjusted * volume};
}

// The paper's "trading day": a run of consecutive ticks. Windows are
// count-based (exactly window_size ticks when full) because every estimator
// downstream is a sum over N terms. A window shorter than window_size is
// flagged not-full and is ineligible for statistics.
struct TradingDayWindow {
    double anchor_time = 0.0;      // time of the window's most recent tick
    std::size_t window_size = 0;   // the target N
    std::span<const TradeTick> ticks;
    bool full = false;

    std::size_t size() const { return ticks.size(); }
};

// Splits a time-ordered tick series into windows of exactly `window_size`
// ticks, aligned so the most recent window ends at the last tick. Any
// remainder is the oldest prefix and comes first, flagged partial. Windows
// are views into the caller's storage.
inline std::vector<TradingDayWindow> partition_windows(std::span<const TradeTick> ticks,
                                                       int window_size) {
    if (window_size <= 0) throw ConfigError("window size must be >= 1");
    for (std::size_t i = 1; i < ticks.size(); ++i) {
        if (ticks[i].time < ticks[i - 1].time)
            throw DomainError("ticks are not time-ordered");
    }

    const std::size_t n = ticks.size();
    const std::size_t w = static_cast<std::size_t>(window_size);
    std::vector<TradingDayWindow> out;
    if (n == 0) return out;

    const std::size_t remainder = n % w;
    out.reserve(n / w + (remainder != 0 ? 1 : 0));
    std::size_t pos = 0;
    if (remainder != 0) {
        auto part = ticks.subspan(0, remainder);
        out.push_back(TradingDayWindow{part.back().time, w, part, false});
        pos = remainder;
    }
    for (; pos < n; pos += w) {
        auto part = ticks.subspan(pos, w);
        out.push_back(TradingDayWindow{part.back().time, w, part, true});
    }
    return out;
}

// Builds a full window over an arbitrary tick run (window_size = run length).
inline TradingDayWindow window_of(std::span<const TradeTick> ticks) {
    if (ticks.empty()) throw DomainError("empty window");
    return TradingDayWindow{ticks.back().time, ticks.size(), ticks, true};
}

}  // namespace mbstat
