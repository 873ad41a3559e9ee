#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbstat/actual_returns.hpp"
#include "mbstat/csv.hpp"
#include "mbstat/errors.hpp"
#include "mbstat/lot_ledger.hpp"
#include "mbstat/price_stats.hpp"
#include "mbstat/returns.hpp"
#include "mbstat/tick.hpp"

namespace mbstat {

enum class Family { Price, Anticipated, ActualSale, ActualInvestor, ActualMarket };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Price: return "price";
        case Family::Anticipated: return "anticipated";
        case Family::ActualSale: return "actual_sale";
        case Family::ActualInvestor: return "actual_investor";
        case Family::ActualMarket: return "actual_market";
    }
    return "?";
}

inline Family parse_family(const std::string& name) {
    for (Family f : {Family::Price, Family::Anticipated, Family::ActualSale,
                     Family::ActualInvestor, Family::ActualMarket}) {
        if (name == family_name(f)) return f;
    }
    throw ConfigError("unknown statistic family '" + name + "'");
}

// One report line. Fields that do not apply to a family are NaN (empty in
// CSV, omitted in JSON). The volatility ingredient columns are shared
// across families; price rows use current_value_volatility for Omega_C^2
// and volume_volatility for Omega_U^2.
struct ReportRow {
    Family family = Family::Price;
    double window_anchor = 0.0;
    std::string investor_id;  // actual_sale / actual_investor rows
    double sale_time = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;  // N ticks, M legs, N sales or Q investors

    double mean = std::numeric_limits<double>::quiet_NaN();
    double second_moment = std::numeric_limits<double>::quiet_NaN();
    double volatility = std::numeric_limits<double>::quiet_NaN();
    double current_value_volatility = std::numeric_limits<double>::quiet_NaN();
    double original_value_volatility = std::numeric_limits<double>::quiet_NaN();
    double volume_volatility = std::numeric_limits<double>::quiet_NaN();
    double cov = std::numeric_limits<double>::quiet_NaN();

    double oracle_delta_abs = std::numeric_limits<double>::quiet_NaN();
    double oracle_delta_rel = std::numeric_limits<double>::quiet_NaN();
};

// Time shift specification: the window length (count-based windows make
// that window_size * median gap), an absolute duration, or a multiple of
// the median inter-trade gap.
struct TauSpec {
    enum class Kind { WindowLength, Absolute, TickMultiple };
    Kind kind = Kind::WindowLength;
    double value = 0.0;
};

// "12.5" -> absolute duration; "5t" -> 5 median inter-trade gaps.
inline TauSpec parse_tau_spec(const std::string& text) {
    std::string t = detail::trim(text);
    if (t.empty()) throw ConfigError("empty tau specification");
    bool ticks = false;
    if (t.back() == 't' || t.back() == 'T') {
        ticks = true;
        t.pop_back();
    }
    double v = 0.0;
    if (!detail::parse_double(t, v) || !(v >= 0.0))
        throw ConfigError("tau must be a non-negative number or '<k>t'");
    return TauSpec{ticks ? TauSpec::Kind::TickMultiple : TauSpec::Kind::Absolute, v};
}

inline double median_tick_gap(std::span<const TradeTick> ticks) {
    if (ticks.size() < 2) throw ConfigError("need at least two ticks to derive a tick gap");
    std::vector<double> gaps;
    gaps.reserve(ticks.size() - 1);
    for (std::size_t i = 1; i < ticks.size(); ++i) gaps.push_back(ticks[i].time - ticks[i - 1].time);
    std::sort(gaps.begin(), gaps.end());
    const std::size_t n = gaps.size();
    double median = n % 2 == 1 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
    if (median <= 0.0) {
        KahanSum total;
        for (double g : gaps) total.add(g);
        median = total.value() / static_cast<double>(n);
    }
    if (median <= 0.0) throw ConfigError("all inter-trade gaps are zero; use an absolute tau");
    return median;
}

inline double resolve_tau(std::span<const TradeTick> ticks, const TauSpec& spec, int window_size) {
    switch (spec.kind) {
        case TauSpec::Kind::Absolute:
            return spec.value;
        case TauSpec::Kind::TickMultiple:
            return spec.value * median_tick_gap(ticks);
        case TauSpec::Kind::WindowLength:
            return static_cast<double>(window_size) * median_tick_gap(ticks);
    }
    throw ConfigError("invalid tau specification");
}

struct PipelineOptions {
    int window_size = 20;
    TauSpec tau;
    MatchPolicy policy = MatchPolicy::Fifo;
    bool oracle = false;
};

struct PipelineResult {
    std::vector<ReportRow> rows;
    std::vector<std::string> skipped;  // per-unit errors, batch not aborted
    std::size_t window_count = 0;
    std::size_t full_window_count = 0;
    double resolved_tau = 0.0;
    double max_oracle_delta_rel = 0.0;
    bool oracle_ok = true;
};

inline constexpr double kOracleGate = 1e-9;

namespace detail {

struct OracleDeltas {
    double abs = 0.0;
    double rel = 0.0;
};

// Dual-route deltas for one statistics row: the decomposed volatility vs
// the direct weighted sum, the ratio mean vs the weighted-sum mean, and
// (when defined) the decomposed second moment vs mean^2 + direct variance.
inline OracleDeltas oracle_deltas(double mean, double weighted_mean, double volatility,
                                  double direct_volatility, double second_moment) {
    OracleDeltas d;
    const auto fold = [&](double a, double b) {
        d.abs = std::max(d.abs, std::abs(a - b));
        d.rel = std::max(d.rel, rel_delta(a, b, mean));
    };
    fold(volatility, direct_volatility);
    fold(mean, weighted_mean);
    if (!std::isnan(second_moment)) fold(second_moment, mean * mean + direct_volatility);
    return d;
}

inline void attach_oracle(ReportRow& row, const OracleDeltas& d, PipelineResult& result) {
    row.oracle_delta_abs = d.abs;
    row.oracle_delta_rel = d.rel;
    result.max_oracle_delta_rel = std::max(result.max_oracle_delta_rel, d.rel);
    if (d.rel > kOracleGate) result.oracle_ok = false;
}

}  // namespace detail

// Runs the full per-window report: price statistics, anticipated-return
// statistics at the configured tau, and the three actual-return levels
// drawn from the lot ledger. Domain errors in one unit (an oversold sale,
// an unresolvable past price) are collected and skip only that unit.
inline PipelineResult run_pipeline(std::span<const EventRecord> records,
                                   const PipelineOptions& options) {
    if (options.window_size < 1) throw ConfigError("window size must be >= 1");

    PipelineResult result;
    const std::vector<TradeTick> ticks = to_ticks(records);
    if (ticks.empty()) return result;

    const auto windows = partition_windows(ticks, options.window_size);
    result.window_count = windows.size();
    const PriceHistory history = PriceHistory::from_ticks(ticks);
    const bool tau_needs_gap = options.tau.kind != TauSpec::Kind::Absolute;
    result.resolved_tau = (tau_needs_gap && ticks.size() < 2)
                              ? 0.0
                              : resolve_tau(ticks, options.tau, options.window_size);

    // Replay the whole log through the ledger once; sales keep their tick
    // index so they can be bucketed into windows afterwards.
    LotLedger ledger;
    std::vector<std::pair<std::size_t, SaleDecomposition>> sales;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const TradeTick& t = ticks[i];
        try {
            if (t.side == Side::Buy) {
                ledger.record_purchase(t.investor_id, t.time, t.price, t.volume);
            } else {
                sales.emplace_back(i, ledger.record_sale(t.investor_id, t.time, t.price,
                                                         t.volume, options.policy));
            }
        } catch (const Error& e) {
            result.skipped.push_back("tick " + std::to_string(i + 1) + " (investor " +
                                     t.investor_id + "): " + e.what());
        }
    }

    std::size_t tick_offset = 0;
    std::size_t sale_cursor = 0;
    for (const auto& window : windows) {
        const std::size_t begin = tick_offset;
        const std::size_t end = begin + window.size();
        tick_offset = end;

        // Partial windows never contribute statistics, but their sales must
        // not leak into the next window's bucket.
        std::vector<const SaleDecomposition*> window_sales;
        while (sale_cursor < sales.size() && sales[sale_cursor].first < end) {
            if (window.full) window_sales.push_back(&sales[sale_cursor].second);
            ++sale_cursor;
        }
        if (!window.full) continue;
        ++result.full_window_count;

        {
            const PriceStats ps = compute_price_stats(window);
            ReportRow row;
            row.family = Family::Price;
            row.window_anchor = window.anchor_time;
            row.count = ps.count;
            row.mean = ps.mean;
            row.second_moment = ps.second_moment;
            row.volatility = ps.volatility;
            row.current_value_volatility = ps.value_volatility;
            row.volume_volatility = ps.volume_volatility;
            row.cov = ps.value_volume_cov;
            if (options.oracle)
                detail::attach_oracle(row,
                                      detail::oracle_deltas(ps.mean, ps.weighted_mean, ps.volatility,
                                                            ps.direct_volatility, ps.second_moment),
                                      result);
            result.rows.push_back(std::move(row));
        }

        try {
            const auto pairs = build_shifted_pairs(window.ticks, result.resolved_tau, history);
            const ReturnStats rs = compute_return_stats(pairs);
            ReportRow row;
            row.family = Family::Anticipated;
            row.window_anchor = window.anchor_time;
            row.count = rs.count;
            row.mean = rs.mean;
            row.second_moment = rs.second_moment;
            row.volatility = rs.volatility;
            row.current_value_volatility = rs.current_value_volatility;
            row.original_value_volatility = rs.past_value_volatility;
            row.cov = rs.current_past_cov;
            if (options.oracle)
                detail::attach_oracle(row,
                                      detail::oracle_deltas(rs.mean, rs.weighted_mean, rs.volatility,
                                                            rs.direct_volatility, rs.second_moment),
                                      result);
            result.rows.push_back(std::move(row));
        } catch (const Error& e) {
            result.skipped.push_back("anticipated stats for window anchored at " +
                                     std::to_string(window.anchor_time) + ": " + e.what());
        }

        if (window_sales.empty()) continue;

        std::map<std::string, std::vector<SaleReturnStats>> by_investor;
        for (const SaleDecomposition* decomp : window_sales) {
            const SaleReturnStats ss = sale_return_stats(*decomp);
            ReportRow row;
            row.family = Family::ActualSale;
            row.window_anchor = window.anchor_time;
            row.investor_id = ss.investor_id;
            row.sale_time = ss.sale_time;
            row.count = ss.leg_count;
            row.mean = ss.mean;
            row.second_moment = ss.second_moment;
            row.volatility = ss.volatility;
            row.current_value_volatility = ss.current_value_volatility;
            row.original_value_volatility = ss.original_value_volatility;
            row.cov = ss.current_original_cov;
            if (options.oracle)
                detail::attach_oracle(row,
                                      detail::oracle_deltas(ss.mean, ss.weighted_mean, ss.volatility,
                                                            ss.direct_volatility, ss.second_moment),
                                      result);
            result.rows.push_back(std::move(row));
            by_investor[ss.investor_id].push_back(std::move(ss));
        }

        std::vector<InvestorDayStats> day_stats;
        day_stats.reserve(by_investor.size());
        for (const auto& [investor, investor_sales] : by_investor) {
            const InvestorDayStats ds = investor_day_stats(investor_sales);
            ReportRow row;
            row.family = Family::ActualInvestor;
            row.window_anchor = window.anchor_time;
            row.investor_id = investor;
            row.count = ds.sale_count;
            row.mean = ds.mean;
            row.second_moment = ds.second_moment;
            row.volatility = ds.volatility;
            row.current_value_volatility = ds.avg_current_value_volatility;
            row.original_value_volatility = ds.avg_original_value_volatility;
            row.cov = ds.cov;
            if (options.oracle)
                detail::attach_oracle(row,
                                      detail::oracle_deltas(ds.mean, ds.weighted_mean, ds.volatility,
                                                            ds.direct_volatility, ds.second_moment),
                                      result);
            result.rows.push_back(std::move(row));
            day_stats.push_back(std::move(ds));
        }

        const CrossInvestorStats cs = cross_investor_stats(day_stats);
        ReportRow row;
        row.family = Family::ActualMarket;
        row.window_anchor = window.anchor_time;
        row.count = cs.investor_count;
        row.mean = cs.mean;
        row.volatility = cs.volatility;
        row.current_value_volatility = cs.current_value_volatility;
        row.original_value_volatility = cs.original_value_volatility;
        row.cov = cs.cov;
        if (options.oracle)
            detail::attach_oracle(
                row,
                detail::oracle_deltas(cs.mean, cs.weighted_mean, cs.volatility, cs.direct_volatility,
                                      std::numeric_limits<double>::quiet_NaN()),
                result);
        result.rows.push_back(std::move(row));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Report emission. CSV columns are fixed and documented in the README; all
// doubles are written with 17 significant digits so emit -> parse is
// lossless. JSON is an array of objects with the same field names, with
// non-applicable fields omitted.

inline const char* kReportHeader =
    "window_anchor,family,investor_id,sale_time,count,mean,second_moment,volatility,"
    "current_value_volatility,original_value_volatility,volume_volatility,cov,"
    "oracle_delta_abs,oracle_delta_rel";

namespace detail {

inline void put_opt(std::ostream& out, double v) {
    if (!std::isnan(v)) out << format_double(v);
}

inline double get_opt(const std::string& field, std::size_t line, std::size_t column) {
    if (trim(field).empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    if (!parse_double(field, v)) throw ParseError(line, column, "expected a number");
    return v;
}

}  // namespace detail

inline void write_report_csv(std::span<const ReportRow> rows, std::ostream& out) {
    out << kReportHeader << '\n';
    for (const auto& r : rows) {
        out << detail::format_double(r.window_anchor) << ',' << family_name(r.family) << ','
            << r.investor_id << ',';
        detail::put_opt(out, r.sale_time);
        out << ',' << r.count << ',';
        detail::put_opt(out, r.mean);
        out << ',';
        detail::put_opt(out, r.second_moment);
        out << ',';
        detail::put_opt(out, r.volatility);
        out << ',';
        detail::put_opt(out, r.current_value_volatility);
        out << ',';
        detail::put_opt(out, r.original_value_volatility);
        out << ',';
        detail::put_opt(out, r.volume_volatility);
        out << ',';
        detail::put_opt(out, r.cov);
        out << ',';
        detail::put_opt(out, r.oracle_delta_abs);
        out << ',';
        detail::put_opt(out, r.oracle_delta_rel);
        out << '\n';
    }
}

inline std::vector<ReportRow> read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, 1, "missing report header");
    if (detail::trim(line) != kReportHeader) throw ParseError(1, 1, "unexpected report header");

    std::vector<ReportRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 14)
            throw ParseError(line_no, f.size() + 1, "expected 14 fields");
        ReportRow r;
        r.window_anchor = detail::get_opt(f[0], line_no, 1);
        r.family = parse_family(detail::trim(f[1]));
        r.investor_id = detail::trim(f[2]);
        r.sale_time = detail::get_opt(f[3], line_no, 4);
        r.count = static_cast<std::size_t>(detail::get_opt(f[4], line_no, 5));
        r.mean = detail::get_opt(f[5], line_no, 6);
        r.second_moment = detail::get_opt(f[6], line_no, 7);
        r.volatility = detail::get_opt(f[7], line_no, 8);
        r.current_value_volatility = detail::get_opt(f[8], line_no, 9);
        r.original_value_volatility = detail::get_opt(f[9], line_no, 10);
        r.volume_volatility = detail::get_opt(f[10], line_no, 11);
        r.cov = detail::get_opt(f[11], line_no, 12);
        r.oracle_delta_abs = detail::get_opt(f[12], line_no, 13);
        r.oracle_delta_rel = detail::get_opt(f[13], line_no, 14);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_report_json(std::span<const ReportRow> rows, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json obj;
        obj["window_anchor"] = r.window_anchor;
        obj["family"] = family_name(r.family);
        if (!r.investor_id.empty()) obj["investor_id"] = r.investor_id;
        if (!std::isnan(r.sale_time)) obj["sale_time"] = r.sale_time;
        obj["count"] = r.count;
        const auto put = [&](const char* key, double v) {
            if (!std::isnan(v)) obj[key] = v;
        };
        put("mean", r.mean);
        put("second_moment", r.second_moment);
        put("volatility", r.volatility);
        put("current_value_volatility", r.current_value_volatility);
        put("original_value_volatility", r.original_value_volatility);
        put("volume_volatility", r.volume_volatility);
        put("cov", r.cov);
        put("oracle_delta_abs", r.oracle_delta_abs);
        put("oracle_delta_rel", r.oracle_delta_rel);
        arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << '\n';
}

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_report_format(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw ConfigError("unknown report format '" + name + "' (csv|json)");
}

inline void emit_report(std::span<const ReportRow> rows, ReportFormat format, std::ostream& out) {
    if (format == ReportFormat::Csv)
        write_report_csv(rows, out);
    else
        write_report_json(rows, out);
}

inline void emit_report_file(std::span<const ReportRow> rows, ReportFormat format,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file '" + path + "'");
    emit_report(rows, format, out);
    if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Tau sweep: anticipated-return statistics per (full window, tau), as a
// plot-ready CSV.

struct SweepRow {
    double window_anchor = 0.0;
    double tau = 0.0;
    ReturnStats stats;
};

inline std::vector<SweepRow> run_tau_sweep(std::span<const EventRecord> records, int window_size,
                                           std::span<const TauSpec> taus,
                                           std::vector<std::string>* skipped = nullptr) {
    if (window_size < 1) throw ConfigError("window size must be >= 1");
    const std::vector<TradeTick> ticks = to_ticks(records);
    std::vector<SweepRow> rows;
    if (ticks.empty()) return rows;
    const auto windows = partition_windows(ticks, window_size);
    const PriceHistory history = PriceHistory::from_ticks(ticks);
    for (const TauSpec& spec : taus) {
        const double tau = resolve_tau(ticks, spec, window_size);
        for (const auto& window : windows) {
            if (!window.full) continue;
            try {
                const auto pairs = build_shifted_pairs(window.ticks, tau, history);
                rows.push_back(SweepRow{window.anchor_time, tau, compute_return_stats(pairs)});
            } catch (const Error& e) {
                if (skipped)
                    skipped->push_back("tau " + std::to_string(tau) + ", window anchored at " +
                                       std::to_string(window.anchor_time) + ": " + e.what());
            }
        }
    }
    return rows;
}

inline const char* kSweepHeader =
    "window_anchor,tau,count,mean,second_moment,volatility,current_value_volatility,"
    "past_value_volatility,cov";

inline void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        out << detail::format_double(r.window_anchor) << ',' << detail::format_double(r.tau) << ','
            << r.stats.count << ',' << detail::format_double(r.stats.mean) << ','
            << detail::format_double(r.stats.second_moment) << ','
            << detail::format_double(r.stats.volatility) << ','
            << detail::format_double(r.stats.current_value_volatility) << ','
            << detail::format_double(r.stats.past_value_volatility) << ','
            << detail::format_double(r.stats.current_past_cov) << '\n';
    }
}

}  // namespace mbstat
