#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gp3 {

// Real compact interval [lo, hi]. No outward rounding is performed; bounds
// are with respect to real arithmetic and callers absorb unit roundoff in
// their tolerances. Empty intervals are not representable: lo > hi is a
// contract violation and throws.
struct Interval {
    double lo;
    double hi;

    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
            throw std::invalid_argument("Interval: requires lo <= hi and no NaN endpoints");
        }
    }

    static Interval point(double x) { return Interval(x, x); }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }

    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
};

inline Interval operator+(const Interval& a, const Interval& b) {
    return Interval(a.lo + b.lo, a.hi + b.hi);
}

inline Interval operator-(const Interval& a, const Interval& b) {
    return Interval(a.lo - b.hi, a.hi - b.lo);
}

inline Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo * b.lo;
    const double p2 = a.lo * b.hi;
    const double p3 = a.hi * b.lo;
    const double p4 = a.hi * b.hi;
    return Interval(std::min(std::min(p1, p2), std::min(p3, p4)),
                    std::max(std::max(p1, p2), std::max(p3, p4)));
}

// Scalar multiple; sign of s decides whether the endpoints swap.
inline Interval operator*(double s, const Interval& a) {
    return s >= 0.0 ? Interval(s * a.lo, s * a.hi) : Interval(s * a.hi, s * a.lo);
}

inline Interval& operator+=(Interval& a, const Interval& b) {
    a = a + b;
    return a;
}

// Largest absolute value attained on the interval.
inline double max_abs(const Interval& a) {
    return std::max(std::abs(a.lo), std::abs(a.hi));
}

}  // namespace gp3
