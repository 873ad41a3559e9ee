#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mbstat/errors.hpp"
#include "mbstat/kahan.hpp"

namespace mbstat {

// Tolerance band for "a variance that is negative only by float noise".
// The band scales with the squared magnitude of the series: noise in
// E[x^2] - E[x]^2 is proportional to x^2, so an absolute cut would reject
// valid large-magnitude inputs and wave through buggy small ones.
inline constexpr double kVarianceSlack = 1e-12;

// x^n for small integer n, exact where the inputs are exact.
inline double ipow(double x, int n) {
    double r = 1.0;
    double b = x;
    for (int e = n; e > 0; e >>= 1) {
        if (e & 1) r *= b;
        b *= b;
    }
    return r;
}

inline double checked_variance(double v, double scale) {
    if (v >= 0.0) return v;
    const double slack = kVarianceSlack * std::max(1.0, scale * scale);
    if (v >= -slack) return 0.0;
    throw DomainError("variance " + std::to_string(v) + " below noise floor " +
                      std::to_string(-slack) + "; inconsistent inputs");
}

// Frequency-based n-th raw moment: (1/N) sum x_i^n.
inline double raw_moment(std::span<const double> series, int order) {
    if (series.empty()) throw DomainError("empty series");
    if (order < 1) throw DomainError("moment order must be >= 1");
    ExtSum acc;
    for (double x : series) acc.add(ipow(x, order));
    return static_cast<double>(acc.value() / static_cast<long double>(series.size()));
}

inline double mean(std::span<const double> series) { return raw_moment(series, 1); }

// Population variance via raw moments, E[x^2] - E[x]^2, with the noise clamp.
inline double variance(std::span<const double> series) {
    if (series.empty()) throw DomainError("empty series");
    ExtSum s1, s2;
    for (double x : series) {
        s1.add(x);
        s2.add(static_cast<long double>(x) * x);
    }
    const long double n = static_cast<long double>(series.size());
    const long double m1 = s1.value() / n;
    const long double m2 = s2.value() / n;
    return checked_variance(static_cast<double>(m2 - m1 * m1), static_cast<double>(m1));
}

// E[xy] - E[x]E[y]. The paper writes this corr{x,y}; it is a covariance.
inline double covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.empty()) throw DomainError("empty series");
    if (xs.size() != ys.size()) throw DomainError("covariance length mismatch");
    ExtSum sx, sy, sxy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx.add(xs[i]);
        sy.add(ys[i]);
        sxy.add(static_cast<long double>(xs[i]) * ys[i]);
    }
    const long double n = static_cast<long double>(xs.size());
    return static_cast<double>(sxy.value() / n - (sx.value() / n) * (sy.value() / n));
}

// Raw moments 1..max_order of one series plus its variance.
struct MomentSet {
    std::size_t count = 0;
    std::vector<double> raw;  // raw[k] is the (k+1)-th raw moment
    double variance = 0.0;

    double moment(int order) const {
        if (order < 1 || static_cast<std::size_t>(order) > raw.size())
            throw DomainError("moment order out of range");
        return raw[static_cast<std::size_t>(order) - 1];
    }
};

inline MomentSet compute_moments(std::span<const double> series, int max_order) {
    if (series.empty()) throw DomainError("empty series");
    if (max_order < 1) throw DomainError("max_order must be >= 1");
    MomentSet out;
    out.count = series.size();
    out.raw.reserve(static_cast<std::size_t>(max_order));
    for (int n = 1; n <= max_order; ++n) out.raw.push_back(raw_moment(series, n));
    const double m1 = out.raw[0];
    const double m2 = max_order >= 2 ? out.raw[1] : raw_moment(series, 2);
    out.variance = checked_variance(m2 - m1 * m1, m1);
    return out;
}

// Normalized m-th power weights: x_i^m / sum_j x_j^m. The x_i must be
// strictly positive (volumes or original values).
inline std::vector<double> power_weights(std::span<const double> xs, int m) {
    if (xs.empty()) throw DomainError("empty series");
    if (m < 1) throw DomainError("weight order must be >= 1");
    std::vector<double> powers;
    powers.reserve(xs.size());
    KahanSum total;
    for (double x : xs) {
        if (!(x > 0.0)) throw DomainError("weight base must be strictly positive");
        const double p = ipow(x, m);
        powers.push_back(p);
        total.add(p);
    }
    const double denom = total.value();
    if (!(denom > 0.0)) throw DomainError("zero weight denominator");
    for (double& p : powers) p /= denom;
    return powers;
}

// One aggregation level of the market-based pattern. Given per-element
// returns r_i, current values c_i and base (original) values b_i that obey
// c_i = r_i * b_i, it produces the value-weighted mean, the second moment
// and the volatility in their decomposed form, together with the
// volatility/covariance ingredients and the direct weighted-sum routes the
// decomposition must reproduce.
struct MarketStats {
    std::size_t count = 0;

    double mean = 0.0;            // sum c / sum b
    double second_moment = 0.0;   // decomposed form
    double volatility = 0.0;      // decomposed form, noise-clamped
    double raw_volatility = 0.0;  // decomposed form before the noise clamp

    double current_volatility = 0.0;  // Omega^2 of the c series
    double base_volatility = 0.0;     // Phi^2 of the b series
    double cross_cov = 0.0;           // corr{c, b}

    double current_mean = 0.0;     // (1/n) sum c
    double base_mean = 0.0;        // (1/n) sum b
    double current_sq_mean = 0.0;  // (1/n) sum c^2
    double base_sq_mean = 0.0;     // (1/n) sum b^2

    // Independent routes to the same numbers, kept for oracle mode.
    double direct_volatility = 0.0;  // sum (r - mean)^2 b^2 / sum b^2
    double weighted_mean = 0.0;      // sum r b / sum b
};

// Relative delta between two routes to the same statistic. Values that are
// both below float noise at the statistic's own scale compare as equal
// zeros; otherwise the delta is relative to the larger magnitude.
inline double rel_delta(double a, double b, double scale) {
    const double diff = std::abs(a - b);
    if (diff == 0.0) return 0.0;
    const double floor = kVarianceSlack * std::max(1.0, scale * scale);
    if (std::abs(a) <= floor && std::abs(b) <= floor) return 0.0;
    return diff / std::max(std::abs(a), std::abs(b));
}

inline MarketStats market_based_stats(std::span<const double> returns,
                                      std::span<const double> current,
                                      std::span<const double> base) {
    const std::size_t n = returns.size();
    if (n == 0) throw DomainError("empty series");
    if (current.size() != n || base.size() != n)
        throw DomainError("market_based_stats length mismatch");

    ExtSum sc, sb, sc2, sb2, scb, srb;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(base[i] > 0.0)) throw DomainError("original value must be strictly positive");
        const long double c = current[i];
        const long double b = base[i];
        sc.add(c);
        sb.add(b);
        sc2.add(c * c);
        sb2.add(b * b);
        scb.add(c * b);
        srb.add(static_cast<long double>(returns[i]) * b);
    }
    const long double nn = static_cast<long double>(n);
    const long double total_base = sb.value();
    const long double total_base_sq = sb2.value();
    if (!(total_base > 0.0L)) throw DomainError("zero total original value");

    const long double h = sc.value() / total_base;
    const long double c1 = sc.value() / nn;
    const long double b1 = total_base / nn;
    const long double c2 = sc2.value() / nn;
    const long double b2 = total_base_sq / nn;
    if (!(b2 > 0.0L)) throw DomainError("zero second moment of original value");

    const long double omega_sq = c2 - c1 * c1;
    const long double phi_sq = b2 - b1 * b1;
    const long double cov = scb.value() / nn - c1 * b1;
    const long double shared = h * h * phi_sq - 2.0L * h * cov;

    MarketStats out;
    out.count = n;
    out.mean = static_cast<double>(h);
    out.weighted_mean = static_cast<double>(srb.value() / total_base);
    out.current_mean = static_cast<double>(c1);
    out.base_mean = static_cast<double>(b1);
    out.current_sq_mean = static_cast<double>(c2);
    out.base_sq_mean = static_cast<double>(b2);
    out.current_volatility = checked_variance(static_cast<double>(omega_sq), out.current_mean);
    out.base_volatility = checked_variance(static_cast<double>(phi_sq), out.base_mean);
    out.cross_cov = static_cast<double>(cov);
    out.second_moment = static_cast<double>((c2 + h * h * phi_sq + shared) / b2);
    out.raw_volatility = static_cast<double>((omega_sq + shared) / b2);
    out.volatility = checked_variance(out.raw_volatility, out.mean);

    ExtSum dev;
    for (std::size_t i = 0; i < n; ++i) {
        const long double d = static_cast<long double>(returns[i]) - h;
        const long double b = base[i];
        dev.add(d * d * b * b);
    }
    out.direct_volatility = static_cast<double>(dev.value() / total_base_sq);

    assert(rel_delta(out.volatility, out.direct_volatility, out.mean) <= 1e-9);
    return out;
}

}  // namespace mbstat
