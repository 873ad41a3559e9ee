#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mbstat/csv.hpp"
#include "mbstat/errors.hpp"

namespace mbstat {

struct PriceModel {
    enum class Kind { Constant, GeometricWalk, Lognormal };
    Kind kind = Kind::Constant;

    double constant = 10.0;  // Constant: c

    double start = 100.0;  // GeometricWalk: p_{i+1} = p_i * exp(drift + step_vol * z)
    double drift = 0.0;
    double step_vol = 0.01;

    double mu = 4.6;  // Lognormal: p_i = exp(mu + sigma * z), i.i.d.
    double sigma = 0.1;
};

struct VolumeModel {
    enum class Kind { Fixed, UniformInt, Pareto };
    Kind kind = Kind::UniformInt;

    double fixed = 100.0;          // Fixed: v
    std::int64_t lo = 1, hi = 1000;  // UniformInt: [lo, hi]
    double alpha = 1.5;            // Pareto: min * u^(-1/alpha)
    double min = 1.0;
};

struct SimConfig {
    std::uint64_t seed = 1;
    int investor_count = 1;
    std::int64_t tick_count = 0;
    PriceModel price;
    VolumeModel volume;
    double buy_sell_mix = 0.5;  // probability that an event is a buy
    int window_size = 20;

    void validate() const {
        if (investor_count < 1) throw ConfigError("investor_count must be >= 1");
        if (tick_count < 0) throw ConfigError("tick_count must be >= 0");
        if (!(buy_sell_mix >= 0.0 && buy_sell_mix <= 1.0))
            throw ConfigError("buy_sell_mix must be in [0, 1]");
        if (window_size < 1) throw ConfigError("window_size must be >= 1");
        switch (price.kind) {
            case PriceModel::Kind::Constant:
                if (!(price.constant > 0.0)) throw ConfigError("constant price must be > 0");
                break;
            case PriceModel::Kind::GeometricWalk:
                if (!(price.start > 0.0)) throw ConfigError("walk start price must be > 0");
                if (!(price.step_vol > 0.0)) throw ConfigError("walk step_vol must be > 0");
                break;
            case PriceModel::Kind::Lognormal:
                if (!(price.sigma > 0.0)) throw ConfigError("lognormal sigma must be > 0");
                break;
        }
        switch (volume.kind) {
            case VolumeModel::Kind::Fixed:
                if (!(volume.fixed > 0.0)) throw ConfigError("fixed volume must be > 0");
                break;
            case VolumeModel::Kind::UniformInt:
                if (volume.lo < 1 || volume.hi < volume.lo)
                    throw ConfigError("uniform_int volume range must satisfy 1 <= lo <= hi");
                break;
            case VolumeModel::Kind::Pareto:
                if (!(volume.alpha > 0.0)) throw ConfigError("pareto alpha must be > 0");
                if (!(volume.min > 0.0)) throw ConfigError("pareto min must be > 0");
                break;
        }
    }
};

namespace detail {

// mt19937_64 with hand-rolled distributions. The standard pins the raw
// bit stream but not std::*_distribution, so reproducibility across
// platforms needs the mappings spelled out here.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : gen_(seed) {}

    // 53-bit mantissa uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [lo, hi] by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    // Standard normal via Marsaglia's polar method with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // Pareto by inverse CDF.
    double pareto(double alpha, double min) {
        return min * std::pow(1.0 - uniform01(), -1.0 / alpha);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// All generated volumes sit on a dyadic 1/1024 grid so ledger replay
// arithmetic (subtraction, pro-rata splits) is exact.
inline constexpr double kSimVolumeGrid = 1024.0;
inline constexpr double kSimVolumeCap = 1073741824.0;  // 2^30

inline double quantize_volume(double v) {
    double q = std::ceil(v * kSimVolumeGrid) / kSimVolumeGrid;
    if (q < 1.0 / kSimVolumeGrid) q = 1.0 / kSimVolumeGrid;
    if (q > kSimVolumeCap) q = kSimVolumeCap;
    return q;
}

inline std::string investor_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "inv%04d", index);
    return buf;
}

}  // namespace detail

// Deterministic synthetic event-log generator. The same config always
// yields the same log, and every sell is feasible against the inventory
// accumulated so far (a sell against an empty account becomes a buy; a
// too-large sell is clipped to the available volume).
inline std::vector<EventRecord> generate(const SimConfig& config) {
    config.validate();
    detail::SimRng rng(config.seed);

    std::vector<double> remaining(static_cast<std::size_t>(config.investor_count), 0.0);
    std::vector<EventRecord> log;
    log.reserve(static_cast<std::size_t>(config.tick_count));

    double walk_price = config.price.start;
    for (std::int64_t i = 1; i <= config.tick_count; ++i) {
        double price = 0.0;
        switch (config.price.kind) {
            case PriceModel::Kind::Constant:
                price = config.price.constant;
                break;
            case PriceModel::Kind::GeometricWalk:
                if (i > 1) walk_price *= std::exp(config.price.drift + config.price.step_vol * rng.normal());
                price = walk_price;
                break;
            case PriceModel::Kind::Lognormal:
                price = std::exp(config.price.mu + config.price.sigma * rng.normal());
                break;
        }

        double volume = 0.0;
        switch (config.volume.kind) {
            case VolumeModel::Kind::Fixed:
                volume = detail::quantize_volume(config.volume.fixed);
                break;
            case VolumeModel::Kind::UniformInt:
                volume = static_cast<double>(rng.uniform_int(config.volume.lo, config.volume.hi));
                break;
            case VolumeModel::Kind::Pareto:
                volume = detail::quantize_volume(rng.pareto(config.volume.alpha, config.volume.min));
                break;
        }

        const std::size_t q = static_cast<std::size_t>(rng.uniform_int(0, config.investor_count - 1));
        bool buy = rng.uniform01() < config.buy_sell_mix;
        if (!buy && remaining[q] <= 0.0) buy = true;  // infeasible sell becomes a buy
        if (!buy) volume = std::min(volume, remaining[q]);

        if (buy)
            remaining[q] += volume;
        else
            remaining[q] -= volume;

        log.push_back(EventRecord{static_cast<double>(i), detail::investor_name(static_cast<int>(q)),
                                  buy ? Side::Buy : Side::Sell, price, volume, 1.0});
    }
    return log;
}

// Named deterministic fixtures for the degenerate branches: M=1, N=1, Q=1
// and the level-3 -> level-2 reduction.
inline std::vector<EventRecord> stress_case(std::string_view name) {
    std::vector<EventRecord> log;
    auto buy = [&](double t, std::string id, double p, double v) {
        log.push_back(EventRecord{t, std::move(id), Side::Buy, p, v, 1.0});
    };
    auto sell = [&](double t, std::string id, double p, double v) {
        log.push_back(EventRecord{t, std::move(id), Side::Sell, p, v, 1.0});
    };

    if (name == "single_lot_single_sale") {
        buy(1, "solo", 10.0, 100.0);
        sell(2, "solo", 12.0, 100.0);
    } else if (name == "one_giant_lot") {
        buy(1, "whale", 10.0, 1000.0);
        const double prices[] = {10.5, 11.0, 9.5, 12.0, 10.0, 11.5, 9.0, 12.5, 10.25, 11.75};
        for (int k = 0; k < 10; ++k) sell(2.0 + k, "whale", prices[k], 50.0);
    } else if (name == "many_tiny_lots") {
        for (int k = 0; k < 50; ++k) buy(1.0 + k, "ant", 10.0 + 0.1 * (k % 7), 10.0);
        sell(60.0, "ant", 12.0, 500.0);
    } else if (name == "all_same_investor") {
        buy(1, "only", 10.0, 200.0);
        buy(2, "only", 11.0, 100.0);
        sell(3, "only", 12.0, 150.0);
        buy(4, "only", 10.5, 50.0);
        sell(5, "only", 11.5, 120.0);
        sell(6, "only", 12.5, 80.0);
    } else if (name == "one_sale_per_investor") {
        const double buy_prices[] = {10.0, 8.0, 12.5, 9.25, 11.0, 10.75, 7.5, 13.0};
        const double sell_prices[] = {11.0, 9.5, 12.0, 10.0, 12.25, 10.0, 9.0, 14.5};
        const double volumes[] = {100.0, 250.0, 75.0, 300.0, 120.0, 60.0, 400.0, 90.0};
        for (int q = 0; q < 8; ++q) buy(1.0 + q, detail::investor_name(q), buy_prices[q], volumes[q]);
        for (int q = 0; q < 8; ++q)
            sell(10.0 + q, detail::investor_name(q), sell_prices[q], volumes[q]);
    } else {
        throw ConfigError("unknown stress case '" + std::string(name) + "'");
    }
    return log;
}

inline const std::vector<std::string>& stress_case_names() {
    static const std::vector<std::string> names = {
        "single_lot_single_sale", "one_giant_lot", "many_tiny_lots", "all_same_investor",
        "one_sale_per_investor"};
    return names;
}

// Flat "key = value" simulator configuration. '#' starts a comment.
// Unknown keys are rejected so typos do not silently fall back to defaults.
inline SimConfig load_sim_config(std::istream& in) {
    SimConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string value = detail::trim(trimmed.substr(eq + 1));

        const auto num = [&]() {
            double v = 0.0;
            if (!detail::parse_double(value, v))
                throw ConfigError("config line " + std::to_string(line_no) + ": '" + key +
                                  "' must be a number");
            return v;
        };

        if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(num());
        } else if (key == "investors") {
            cfg.investor_count = static_cast<int>(num());
        } else if (key == "ticks") {
            cfg.tick_count = static_cast<std::int64_t>(num());
        } else if (key == "window") {
            cfg.window_size = static_cast<int>(num());
        } else if (key == "buy_sell_mix") {
            cfg.buy_sell_mix = num();
        } else if (key == "price_model") {
            if (value == "constant")
                cfg.price.kind = PriceModel::Kind::Constant;
            else if (value == "gwalk")
                cfg.price.kind = PriceModel::Kind::GeometricWalk;
            else if (value == "lognormal")
                cfg.price.kind = PriceModel::Kind::Lognormal;
            else
                throw ConfigError("price_model must be constant|gwalk|lognormal");
        } else if (key == "price_const") {
            cfg.price.constant = num();
        } else if (key == "price_start") {
            cfg.price.start = num();
        } else if (key == "price_drift") {
            cfg.price.drift = num();
        } else if (key == "price_step_vol") {
            cfg.price.step_vol = num();
        } else if (key == "price_mu") {
            cfg.price.mu = num();
        } else if (key == "price_sigma") {
            cfg.price.sigma = num();
        } else if (key == "volume_model") {
            if (value == "fixed")
                cfg.volume.kind = VolumeModel::Kind::Fixed;
            else if (value == "uniform_int")
                cfg.volume.kind = VolumeModel::Kind::UniformInt;
            else if (value == "pareto")
                cfg.volume.kind = VolumeModel::Kind::Pareto;
            else
                throw ConfigError("volume_model must be fixed|uniform_int|pareto");
        } else if (key == "volume_fixed") {
            cfg.volume.fixed = num();
        } else if (key == "volume_lo") {
            cfg.volume.lo = static_cast<std::int64_t>(num());
        } else if (key == "volume_hi") {
            cfg.volume.hi = static_cast<std::int64_t>(num());
        } else if (key == "volume_alpha") {
            cfg.volume.alpha = num();
        } else if (key == "volume_min") {
            cfg.volume.min = num();
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                              "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline SimConfig load_sim_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return load_sim_config(in);
}

}  // namespace mbstat
