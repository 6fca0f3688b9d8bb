#include <doctest.h>

#include <random>

#include "interval.hpp"

using gp3::Interval;

TEST_CASE("interval addition") {
    const Interval r = Interval(1, 2) + Interval(3, 4);
    CHECK(r.lo == 4.0);
    CHECK(r.hi == 6.0);

    const Interval identity = Interval(0, 0) + Interval(-1.5, 2.5);
    CHECK(identity.lo == -1.5);
    CHECK(identity.hi == 2.5);

    const Interval mixed = Interval(-2, -1) + Interval(1, 2);
    CHECK(mixed.lo == -1.0);
    CHECK(mixed.hi == 1.0);
}

TEST_CASE("interval subtraction") {
    const Interval r = Interval(1, 2) - Interval(3, 4);
    CHECK(r.lo == -3.0);
    CHECK(r.hi == -1.0);

    const Interval identity = Interval(1, 2) - Interval(0, 0);
    CHECK(identity.lo == 1.0);
    CHECK(identity.hi == 2.0);

    // Subtracting an interval from itself contains 0 but is not [0, 0].
    const Interval self = Interval(1, 2) - Interval(1, 2);
    CHECK(self.lo == -1.0);
    CHECK(self.hi == 1.0);
    CHECK(self.contains(0.0));
}

TEST_CASE("interval multiplication") {
    const Interval r = Interval(-1, 2) * Interval(3, 4);
    CHECK(r.lo == -4.0);
    CHECK(r.hi == 8.0);

    const Interval zero = Interval(0, 0) * Interval(-7, 11);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi == 0.0);

    const Interval neg = Interval(-2, -1) * Interval(-3, -2);
    CHECK(neg.lo == 2.0);
    CHECK(neg.hi == 6.0);
}

TEST_CASE("empty intervals are not constructible") {
    CHECK_THROWS_AS(Interval(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Interval(0.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("inclusion soundness under random sampling") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> endpoints(-5.0, 5.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a1 = endpoints(rng), a2 = endpoints(rng);
        const double b1 = endpoints(rng), b2 = endpoints(rng);
        const Interval a(std::min(a1, a2), std::max(a1, a2));
        const Interval b(std::min(b1, b2), std::max(b1, b2));
        const double x = a.lo + unit(rng) * a.width();
        const double y = b.lo + unit(rng) * b.width();
        CHECK((a + b).contains(x + y));
        CHECK((a - b).contains(x - y));
        CHECK((a * b).contains(x * y));
    }
}

TEST_CASE("degenerate intervals behave like exact values") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> values(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = values(rng), y = values(rng);
        const Interval a = Interval::point(x);
        const Interval b = Interval::point(y);
        CHECK((a + b).lo == x + y);
        CHECK((a + b).hi == x + y);
        CHECK((a - b).lo == x - y);
        CHECK((a * b).lo == x * y);
        CHECK((a * b).hi == x * y);
    }
}

TEST_CASE("monotonicity under inclusion") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> endpoints(-5.0, 5.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double a1 = endpoints(rng), a2 = endpoints(rng);
        const double b1 = endpoints(rng), b2 = endpoints(rng);
        const Interval a(std::min(a1, a2), std::max(a1, a2));
        const Interval b(std::min(b1, b2), std::max(b1, b2));
        // Random subintervals.
        double s1 = a.lo + unit(rng) * a.width(), s2 = a.lo + unit(rng) * a.width();
        double t1 = b.lo + unit(rng) * b.width(), t2 = b.lo + unit(rng) * b.width();
        const Interval a_sub(std::min(s1, s2), std::max(s1, s2));
        const Interval b_sub(std::min(t1, t2), std::max(t1, t2));
        CHECK((a + b).contains(a_sub + b_sub));
        CHECK((a - b).contains(a_sub - b_sub));
        CHECK((a * b).contains(a_sub * b_sub));
    }
}

TEST_CASE("scalar multiplication flips endpoints for negative scalars") {
    const Interval a(1.0, 3.0);
    const Interval scaled = -2.0 * a;
    CHECK(scaled.lo == -6.0);
    CHECK(scaled.hi == -2.0);
    CHECK(gp3::max_abs(scaled) == 6.0);
}
