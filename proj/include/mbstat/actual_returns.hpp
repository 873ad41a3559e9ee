#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mbstat/errors.hpp"
#include "mbstat/lot_ledger.hpp"
#include "mbstat/moments.hpp"

namespace mbstat {

// Level 1: market-based statistics of the actual return of one sale,
// generated by the sale's matched purchase lots.
struct SaleReturnStats {
    double sale_time = 0.0;
    std::string investor_id;
    std::size_t leg_count = 0;  // M(i)

    double mean = 0.0;                       // g(t_i; 1)
    double second_moment = 0.0;              // g(t_i; 2)
    double volatility = 0.0;                 // sigma_g^2(t_i)
    double current_value_volatility = 0.0;   // Omega_C^2(t_i)
    double original_value_volatility = 0.0;  // Phi^2(t_i)
    double current_original_cov = 0.0;       // corr{C(t_i,t_j) C_o(t_j)}

    double avg_current_value = 0.0;   // C(t_i; 1)
    double avg_original_value = 0.0;  // C_o(t_i; 1)

    double direct_volatility = 0.0;
    double weighted_mean = 0.0;
};

// Level 2: statistics of the per-sale average returns of one investor
// over one trading-day window.
struct InvestorDayStats {
    std::string investor_id;
    std::size_t sale_count = 0;  // N

    double mean = 0.0;                           // G(t|1)
    double second_moment = 0.0;                  // G(t|2)
    double volatility = 0.0;                     // sigma_G^2(t)
    double avg_current_value_volatility = 0.0;   // Omega_C^2(t)
    double avg_original_value_volatility = 0.0;  // Phi^2(t)
    double cov = 0.0;                            // corr{C(t_i;1) C_o(t_i;1)}

    double avg_current_value = 0.0;   // C(t; 1|1, q)
    double avg_original_value = 0.0;  // C_o(t; 1|1, q)

    double direct_volatility = 0.0;
    double weighted_mean = 0.0;
};

// Level 3: statistics of the investor-day returns across all investors
// active in the window.
struct CrossInvestorStats {
    std::size_t investor_count = 0;  // Q

    double mean = 0.0;                       // R(t|1)
    double volatility = 0.0;                 // sigma_R^2(t)
    double current_value_volatility = 0.0;   // Omega_R^2(t)
    double original_value_volatility = 0.0;  // Phi_R^2(t)
    double cov = 0.0;                        // corr{C(t;1|1,q) C_o(t;1|1,q)}

    double direct_volatility = 0.0;
    double weighted_mean = 0.0;
};

// C(t_i;1) and C_o(t_i;1): the per-leg means of current and original value.
inline std::pair<double, double> per_sale_value_averages(const SaleDecomposition& decomp) {
    if (decomp.legs.empty()) throw DomainError("sale decomposition has no legs");
    KahanSum current, original;
    for (const auto& leg : decomp.legs) {
        current.add(leg.current_value);
        original.add(leg.original_value);
    }
    const double m = static_cast<double>(decomp.legs.size());
    return {current.value() / m, original.value() / m};
}

inline SaleReturnStats sale_return_stats(const SaleDecomposition& decomp) {
    if (decomp.legs.empty()) throw DomainError("sale decomposition has no legs");
    std::vector<double> r, current, original;
    r.reserve(decomp.legs.size());
    current.reserve(decomp.legs.size());
    original.reserve(decomp.legs.size());
    for (const auto& leg : decomp.legs) {
        r.push_back(leg.actual_return);
        current.push_back(leg.current_value);
        original.push_back(leg.original_value);
    }
    const MarketStats s = market_based_stats(r, current, original);

    SaleReturnStats out;
    out.sale_time = decomp.sale_time;
    out.investor_id = decomp.investor_id;
    out.leg_count = s.count;
    out.mean = s.mean;
    out.second_moment = s.second_moment;
    out.volatility = s.volatility;
    out.current_value_volatility = s.current_volatility;
    out.original_value_volatility = s.base_volatility;
    out.current_original_cov = s.cross_cov;
    out.avg_current_value = s.current_mean;
    out.avg_original_value = s.base_mean;
    out.direct_volatility = s.direct_volatility;
    out.weighted_mean = s.weighted_mean;
    return out;
}

inline InvestorDayStats investor_day_stats(std::span<const SaleReturnStats> sales) {
    if (sales.empty()) throw DomainError("no sales in window for investor");
    std::vector<double> g, current, original;
    g.reserve(sales.size());
    current.reserve(sales.size());
    original.reserve(sales.size());
    for (const auto& s : sales) {
        g.push_back(s.mean);
        current.push_back(s.avg_current_value);
        original.push_back(s.avg_original_value);
    }
    const MarketStats s = market_based_stats(g, current, original);

    InvestorDayStats out;
    out.investor_id = sales.front().investor_id;
    out.sale_count = s.count;
    out.mean = s.mean;
    out.second_moment = s.second_moment;
    out.volatility = s.volatility;
    out.avg_current_value_volatility = s.current_volatility;
    out.avg_original_value_volatility = s.base_volatility;
    out.cov = s.cross_cov;
    out.avg_current_value = s.current_mean;
    out.avg_original_value = s.base_mean;
    out.direct_volatility = s.direct_volatility;
    out.weighted_mean = s.weighted_mean;
    return out;
}

inline CrossInvestorStats cross_investor_stats(std::span<const InvestorDayStats> investors) {
    if (investors.empty()) throw DomainError("no investors in window");
    std::vector<double> g, current, original;
    g.reserve(investors.size());
    current.reserve(investors.size());
    original.reserve(investors.size());
    for (const auto& s : investors) {
        g.push_back(s.mean);
        current.push_back(s.avg_current_value);
        original.push_back(s.avg_original_value);
    }
    const MarketStats s = market_based_stats(g, current, original);

    CrossInvestorStats out;
    out.investor_count = s.count;
    out.mean = s.mean;
    out.volatility = s.volatility;
    out.current_value_volatility = s.current_volatility;
    out.original_value_volatility = s.base_volatility;
    out.cov = s.cross_cov;
    out.direct_volatility = s.direct_volatility;
    out.weighted_mean = s.weighted_mean;
    return out;
}

}  // namespace mbstat
