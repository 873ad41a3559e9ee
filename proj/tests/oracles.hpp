#pragma once

// Independent reference implementations used to compute and freeze expected
// values. Plain long-double loops over the direct formulas only; nothing
// here shares code with the library paths under test.

#include <cstddef>
#include <span>
#include <vector>

namespace oracle {

inline double freq_moment(std::span<const double> xs, int n) {
    long double acc = 0.0L;
    for (double x : xs) {
        long double p = 1.0L;
        for (int k = 0; k < n; ++k) p *= x;
        acc += p;
    }
    return static_cast<double>(acc / static_cast<long double>(xs.size()));
}

inline double freq_variance(std::span<const double> xs) {
    long double s1 = 0.0L, s2 = 0.0L;
    for (double x : xs) {
        s1 += x;
        s2 += static_cast<long double>(x) * x;
    }
    const long double n = static_cast<long double>(xs.size());
    const long double m1 = s1 / n;
    return static_cast<double>(s2 / n - m1 * m1);
}

inline double freq_covariance(std::span<const double> xs, std::span<const double> ys) {
    long double sx = 0.0L, sy = 0.0L, sxy = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxy += static_cast<long double>(xs[i]) * ys[i];
    }
    const long double n = static_cast<long double>(xs.size());
    return static_cast<double>(sxy / n - (sx / n) * (sy / n));
}

// Value-weighted mean: sum r_i b_i / sum b_i.
inline double weighted_mean(std::span<const double> r, std::span<const double> base) {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < r.size(); ++i) {
        num += static_cast<long double>(r[i]) * base[i];
        den += base[i];
    }
    return static_cast<double>(num / den);
}

// Proceeds over cost: sum c_i / sum b_i.
inline double ratio_mean(std::span<const double> current, std::span<const double> base) {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < current.size(); ++i) {
        num += current[i];
        den += base[i];
    }
    return static_cast<double>(num / den);
}

// The direct m=2 weighted variance: sum (r_i - center)^2 b_i^2 / sum b_j^2.
inline double direct_weighted_variance(std::span<const double> r, std::span<const double> base,
                                       double center) {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const long double d = static_cast<long double>(r[i]) - center;
        const long double b2 = static_cast<long double>(base[i]) * base[i];
        num += d * d * b2;
        den += b2;
    }
    return static_cast<double>(num / den);
}

inline double direct_weighted_variance(std::span<const double> r, std::span<const double> base) {
    return direct_weighted_variance(r, base, weighted_mean(r, base));
}

// Relative agreement metric shared by the identity checks: two routes whose
// magnitudes are both below float noise at the statistic's scale count as
// equal zeros; otherwise the delta is relative to the larger magnitude.
inline double rel_delta(double a, double b, double scale) {
    const double diff = a > b ? a - b : b - a;
    if (diff == 0.0) return 0.0;
    const double floor = 1e-12 * (scale * scale > 1.0 ? scale * scale : 1.0);
    const double aabs = a > 0 ? a : -a;
    const double babs = b > 0 ? b : -b;
    if (aabs <= floor && babs <= floor) return 0.0;
    return diff / (aabs > babs ? aabs : babs);
}

}  // namespace oracle
