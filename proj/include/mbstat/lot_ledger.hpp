#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iterator>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mbstat/errors.hpp"
#include "mbstat/kahan.hpp"

namespace mbstat {

enum class MatchPolicy { Fifo, Lifo, ProRata };

inline MatchPolicy parse_match_policy(const std::string& name) {
    if (name == "fifo") return MatchPolicy::Fifo;
    if (name == "lifo") return MatchPolicy::Lifo;
    if (name == "prorata") return MatchPolicy::ProRata;
    throw ConfigError("unknown match policy '" + name + "' (fifo|lifo|prorata)");
}

// A past buy parcel. Prices are already adjusted to the present (the
// adjustment factor is applied at ingestion).
struct PurchaseLot {
    double purchase_time = 0.0;
    double adjusted_price = 0.0;
    double volume_remaining = 0.0;

    double original_value() const { return adjusted_price * volume_remaining; }
};

// One matched piece of a sale: the slice of a lot it came from, its value
// at the sale price, its original (purchase) value, and the realized return.
struct SaleLeg {
    double purchase_time = 0.0;
    double volume = 0.0;
    double lot_price = 0.0;
    double current_value = 0.0;   // sale_price * volume
    double original_value = 0.0;  // lot_price * volume
    double actual_return = 0.0;   // current_value / original_value
};

struct SaleDecomposition {
    double sale_time = 0.0;
    std::string investor_id;
    double sale_price = 0.0;
    double sale_volume = 0.0;
    std::vector<SaleLeg> legs;

    std::size_t leg_count() const { return legs.size(); }
};

namespace detail {

// Exact ProRata needs integer arithmetic. Volumes produced by the simulator
// sit on a dyadic 1/1024 grid; anything on a 2^-20 grid within +-2^40 maps
// losslessly to int64 units.
inline constexpr double kVolumeGrid = 1048576.0;  // 2^20

inline bool on_grid(double v, std::int64_t& units) {
    const double scaled = v * kVolumeGrid;
    if (!(std::abs(scaled) < 0x1p62) || scaled != std::floor(scaled)) return false;
    units = static_cast<std::int64_t>(scaled);
    return true;
}

}  // namespace detail

// Per-investor cost-basis ledger. Single writer per investor stream;
// distinct investors are independent.
class LotLedger {
public:
    void record_purchase(const std::string& investor_id, double time, double price,
                         double volume) {
        if (!(price > 0.0)) throw DomainError("purchase price must be strictly positive");
        if (!(volume > 0.0)) throw DomainError("purchase volume must be strictly positive");
        Account& acct = accounts_[investor_id];
        check_ordering(acct, time);
        acct.lots.push_back(PurchaseLot{time, price, volume});
        acct.last_time = time;
    }

    SaleDecomposition record_sale(const std::string& investor_id, double time, double price,
                                  double volume, MatchPolicy policy) {
        if (!(price > 0.0)) throw DomainError("sale price must be strictly positive");
        if (!(volume > 0.0)) throw DomainError("sale volume must be strictly positive");

        auto it = accounts_.find(investor_id);
        if (it == accounts_.end()) throw InsufficientInventory(investor_id, volume, 0.0);
        Account& acct = it->second;
        check_ordering(acct, time);

        // Sub-ulp excess is summation dust (a caller selling exactly the
        // inventory it was told it has), not an oversell.
        const double available = total_volume(acct);
        if (volume - available > 1e-12 * std::max(volume, available))
            throw InsufficientInventory(investor_id, volume, available);

        SaleDecomposition decomp;
        decomp.sale_time = time;
        decomp.investor_id = investor_id;
        decomp.sale_price = price;
        decomp.sale_volume = volume;

        switch (policy) {
            case MatchPolicy::Fifo:
                consume_sequential(acct, price, volume, /*from_front=*/true, decomp);
                break;
            case MatchPolicy::Lifo:
                consume_sequential(acct, price, volume, /*from_front=*/false, decomp);
                break;
            case MatchPolicy::ProRata:
                consume_pro_rata(acct, price, volume, decomp);
                break;
        }
        acct.last_time = time;
        return decomp;
    }

    double remaining_inventory(const std::string& investor_id) const {
        auto it = accounts_.find(investor_id);
        if (it == accounts_.end()) return 0.0;
        return total_volume(it->second);
    }

    // Live lots in purchase order; empty for unknown investors.
    std::vector<PurchaseLot> lots(const std::string& investor_id) const {
        auto it = accounts_.find(investor_id);
        if (it == accounts_.end()) return {};
        return {it->second.lots.begin(), it->second.lots.end()};
    }

    std::vector<std::string> investors() const {
        std::vector<std::string> ids;
        ids.reserve(accounts_.size());
        for (const auto& [id, _] : accounts_) ids.push_back(id);
        return ids;
    }

private:
    struct Account {
        std::deque<PurchaseLot> lots;
        double last_time = -std::numeric_limits<double>::infinity();
    };

    static void check_ordering(const Account& acct, double time) {
        if (time < acct.last_time)
            throw OrderingError(0, "ledger event before the investor's last event");
    }

    static double total_volume(const Account& acct) {
        KahanSum total;
        for (const auto& lot : acct.lots) total.add(lot.volume_remaining);
        return total.value();
    }

    static void emit_leg(SaleDecomposition& decomp, const PurchaseLot& lot, double take,
                         double sale_price) {
        const double current = sale_price * take;
        const double original = lot.adjusted_price * take;
        decomp.legs.push_back(SaleLeg{lot.purchase_time, take, lot.adjusted_price, current,
                                      original, current / original});
    }

    static void consume_sequential(Account& acct, double price, double volume, bool from_front,
                                   SaleDecomposition& decomp) {
        double need = volume;
        while (need > 0.0 && !acct.lots.empty()) {
            PurchaseLot& lot = from_front ? acct.lots.front() : acct.lots.back();
            const double take = std::min(lot.volume_remaining, need);
            emit_leg(decomp, lot, take, price);
            lot.volume_remaining -= take;
            need -= take;
            if (lot.volume_remaining == 0.0) {
                if (from_front)
                    acct.lots.pop_front();
                else
                    acct.lots.pop_back();
            }
        }
        // Off-grid inputs can strand sub-ulp dust between the feasibility
        // check and the sequential subtraction chain.
        if (need > 1e-9 * volume)
            throw InsufficientInventory(decomp.investor_id, decomp.sale_volume,
                                        decomp.sale_volume - need);
    }

    static void consume_pro_rata(Account& acct, double price, double volume,
                                 SaleDecomposition& decomp) {
        std::int64_t volume_units = 0;
        bool exact = detail::on_grid(volume, volume_units);
        std::vector<std::int64_t> lot_units(acct.lots.size(), 0);
        std::int64_t total_units = 0;
        if (exact) {
            for (std::size_t i = 0; i < acct.lots.size(); ++i) {
                if (!detail::on_grid(acct.lots[i].volume_remaining, lot_units[i])) {
                    exact = false;
                    break;
                }
                total_units += lot_units[i];
            }
        }

        if (exact) {
            // take_i = floor(volume * lot_i / total), with the leftover units
            // handed to the largest exact remainders (ties to earlier lots).
            std::vector<std::int64_t> takes(acct.lots.size(), 0);
            std::vector<std::int64_t> rems(acct.lots.size(), 0);
            std::int64_t assigned = 0;
            for (std::size_t i = 0; i < acct.lots.size(); ++i) {
                const __int128 num = static_cast<__int128>(volume_units) * lot_units[i];
                takes[i] = static_cast<std::int64_t>(num / total_units);
                rems[i] = static_cast<std::int64_t>(num % total_units);
                assigned += takes[i];
            }
            std::int64_t leftover = volume_units - assigned;
            std::vector<std::size_t> order(acct.lots.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return rems[a] > rems[b]; });
            for (std::size_t k = 0; leftover > 0; ++k, --leftover) takes[order[k]] += 1;

            for (std::size_t i = 0; i < acct.lots.size(); ++i) {
                if (takes[i] == 0) continue;
                const double take = static_cast<double>(takes[i]) / detail::kVolumeGrid;
                emit_leg(decomp, acct.lots[i], take, price);
                acct.lots[i].volume_remaining =
                    static_cast<double>(lot_units[i] - takes[i]) / detail::kVolumeGrid;
            }
        } else {
            const double total = total_volume(acct);
            double need = volume;
            for (std::size_t i = 0; i < acct.lots.size() && need > 0.0; ++i) {
                PurchaseLot& lot = acct.lots[i];
                double take = (i + 1 == acct.lots.size())
                                  ? need
                                  : volume * (lot.volume_remaining / total);
                take = std::min({take, lot.volume_remaining, need});
                if (take <= 0.0) continue;
                emit_leg(decomp, lot, take, price);
                lot.volume_remaining -= take;
                need -= take;
            }
        }

        for (auto it = acct.lots.begin(); it != acct.lots.end();) {
            it = it->volume_remaining == 0.0 ? acct.lots.erase(it) : std::next(it);
        }
    }

    std::unordered_map<std::string, Account> accounts_;
};

}  // namespace mbstat
