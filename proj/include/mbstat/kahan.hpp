#pragma once

#include <cmath>
#include <span>

namespace mbstat {

// Neumaier-compensated accumulator. Unlike plain Kahan it also compensates
// when the incoming term is larger than the running sum, so the summation
// order of heavy-tailed series does not matter for accuracy.
template <typename Float>
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(Float initial) : sum_(initial) {}

    void add(Float value) {
        const Float t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            comp_ += (sum_ - t) + value;
        } else {
            comp_ += (value - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(Float value) {
        add(value);
        return *this;
    }

    Float value() const { return sum_ + comp_; }

private:
    Float sum_ = 0.0;
    Float comp_ = 0.0;
};

using KahanSum = CompensatedSum<double>;

// Extended-precision accumulator for the moment kernel: the decomposition
// identities subtract same-magnitude second moments, so the ingredients are
// formed with long-double headroom and only the results drop to double.
using ExtSum = CompensatedSum<long double>;

inline double kahan_total(std::span<const double> values) {
    KahanSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

}  // namespace mbstat
