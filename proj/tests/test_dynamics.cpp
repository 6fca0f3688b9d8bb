#include <doctest.h>

#include <cmath>

#include "dynamics.hpp"

using gp3::Hyperrectangle;
using gp3::IntegratorConfig;
using gp3::OdeSystem;
using gp3::SmibParams;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

OdeSystem decay_system(int d) {
    OdeSystem system;
    system.dimension = d;
    system.name = "decay";
    system.field = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& dxdt) { dxdt = -x; };
    return system;
}

OdeSystem zero_system(int d) {
    OdeSystem system;
    system.dimension = d;
    system.name = "zero";
    system.field = [](double, const Eigen::VectorXd&, Eigen::VectorXd& dxdt) {
        dxdt.setZero();
    };
    return system;
}

OdeSystem oscillator_system() {
    OdeSystem system;
    system.dimension = 2;
    system.name = "oscillator";
    system.field = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& dxdt) {
        dxdt[0] = x[1];
        dxdt[1] = -x[0];
    };
    return system;
}

}  // namespace

TEST_CASE("integrate: zero field holds the state exactly") {
    const IntegratorConfig config;
    const auto states = integrate(zero_system(2), vec({1.5, -2.0}), {0.0, 0.5, 1.0}, config);
    REQUIRE(states.size() == 3);
    for (const auto& x : states) {
        CHECK(x[0] == 1.5);
        CHECK(x[1] == -2.0);
    }
}

TEST_CASE("integrate: exponential decay hits the analytic value") {
    IntegratorConfig config;
    config.rel_tol = 1e-8;
    config.abs_tol = 1e-10;
    const auto states = integrate(decay_system(1), vec({1.0}), {1.0}, config);
    REQUIRE(states.size() == 1);
    CHECK(std::abs(states[0][0] - std::exp(-1.0)) <= 10.0 * config.rel_tol);
}

TEST_CASE("integrate: oscillator conserves energy within tolerance") {
    IntegratorConfig config;
    config.rel_tol = 1e-8;
    config.abs_tol = 1e-12;
    const double period = 2.0 * M_PI;
    const auto states = integrate(oscillator_system(), vec({1.0, 0.0}), {period}, config);
    const double energy = states[0].squaredNorm();
    CHECK(std::abs(energy - 1.0) <= 100.0 * config.rel_tol);
}

TEST_CASE("integrate: third-order convergence under forced fixed steps") {
    // Huge tolerances accept every step; initial_step = max_step = h forces a
    // fixed step size. Global error on dx/dt = -x at t = 1 then scales as h^3.
    std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errors;
    for (const double h : hs) {
        IntegratorConfig config;
        config.rel_tol = 1e12;
        config.abs_tol = 1e12;
        config.initial_step = h;
        config.max_step = h;
        const auto states = integrate(decay_system(1), vec({1.0}), {1.0}, config);
        errors.push_back(std::abs(states[0][0] - std::exp(-1.0)));
    }
    // Least-squares slope of log(error) vs log(h).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(hs.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(hs[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope >= 2.8);
    CHECK(slope <= 3.2);
}

TEST_CASE("integrate: halving the tolerance never increases the error") {
    double previous = std::numeric_limits<double>::infinity();
    for (const double tol : {1e-4, 5e-5, 2.5e-5, 1.25e-5}) {
        IntegratorConfig config;
        config.rel_tol = tol;
        config.abs_tol = tol * 1e-2;
        const auto states = integrate(decay_system(1), vec({1.0}), {1.0}, config);
        const double error = std::abs(states[0][0] - std::exp(-1.0));
        CHECK(error <= previous + 1e-15);
        previous = error;
    }
}

TEST_CASE("integrate: input validation") {
    const IntegratorConfig config;
    CHECK_THROWS_AS(integrate(decay_system(1), vec({1.0, 2.0}), {1.0}, config),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(decay_system(1), vec({1.0}), {1.0, 0.5}, config),
                    std::invalid_argument);
    IntegratorConfig bad;
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(integrate(decay_system(1), vec({1.0}), {1.0}, bad),
                    std::invalid_argument);
}

TEST_CASE("smib: equilibrium and pure damping") {
    const OdeSystem system = gp3::smib_system({});
    Eigen::VectorXd dxdt(2);

    system.field(0.0, vec({0.0, 0.0}), dxdt);
    CHECK(dxdt[0] == 0.0);
    CHECK(dxdt[1] == 0.0);

    // Only the damping term acts when the angle is at equilibrium.
    system.field(0.0, vec({1.0, 0.0}), dxdt);
    CHECK(dxdt[0] == doctest::Approx(-20.0).epsilon(1e-14));
    CHECK(dxdt[1] == 1.0);

    // Small-angle linearization: phi_dd ~ -a12 cos(theta1) phi / m1.
    const SmibParams params;
    for (const double phi : {0.01, -0.005, 0.002}) {
        system.field(0.0, vec({0.0, phi}), dxdt);
        const double linear = -params.a12 * std::cos(params.theta1) * phi / params.m1;
        CHECK(dxdt[0] == doctest::Approx(linear).epsilon(0.01));
    }

    CHECK_THROWS_AS(gp3::smib_system(SmibParams{0.0, 20.0, 10.0, 0.05}),
                    std::invalid_argument);
}

TEST_CASE("smib: equilibrium is preserved over long horizons") {
    const OdeSystem system = gp3::smib_system({});
    IntegratorConfig config;
    config.rel_tol = 1e-10;
    config.abs_tol = 1e-14;
    std::vector<double> times(100);
    for (int k = 0; k < 100; ++k) times[k] = (k + 1) * 1.0;  // 10^4 steps of 0.01 in spirit
    const auto states = integrate(system, vec({0.0, 0.0}), times, config);
    for (const auto& x : states) {
        CHECK(std::abs(x[0]) <= 1e-12);
        CHECK(std::abs(x[1]) <= 1e-12);
    }
}

TEST_CASE("lyapunov value: equilibrium, single term, analytic sum") {
    const IntegratorConfig config;
    const OdeSystem system = decay_system(1);

    CHECK(gp3::lyapunov_value(gp3::smib_system({}), vec({0.0, 0.0}), 100, 0.01, config) ==
          doctest::Approx(0.0).epsilon(1e-20));

    CHECK(gp3::lyapunov_value(system, vec({1.5}), 0, 0.5, config) ==
          doctest::Approx(2.25).epsilon(1e-14));

    // dx/dt = -x, x0 = 1, K = 2, dt = 1: 1 + e^-2 + e^-4.
    const double expected = 1.0 + std::exp(-2.0) + std::exp(-4.0);
    CHECK(gp3::lyapunov_value(system, vec({1.0}), 2, 1.0, config) ==
          doctest::Approx(expected).epsilon(1e-7));

    // Non-negative and monotone in the horizon.
    double previous = -1.0;
    for (const int horizon : {0, 1, 3, 10}) {
        const double value = gp3::lyapunov_value(system, vec({0.7}), horizon, 0.3, config);
        CHECK(value >= previous);
        previous = value;
    }
}

TEST_CASE("lyapunov dataset: grid layout and constant-trajectory values") {
    const IntegratorConfig config;
    const Hyperrectangle domain = Hyperrectangle::from_bounds(vec({-1.0, -1.0}), vec({1.0, 1.0}));

    const auto single = gp3::build_lyapunov_dataset(zero_system(2), domain, 1, 5, 0.1, config, 2);
    REQUIRE(single.initial_states.rows() == 1);
    CHECK(single.initial_states(0, 0) == 0.0);
    CHECK(single.initial_states(0, 1) == 0.0);

    const auto dataset = gp3::build_lyapunov_dataset(zero_system(2), domain, 16, 5, 0.1, config, 2);
    REQUIRE(dataset.initial_states.rows() == 16);
    for (long long i = 0; i < 16; ++i) {
        const double expected = 6.0 * dataset.initial_states.row(i).squaredNorm();
        CHECK(dataset.values[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("flow map: fixed point, analytic contraction, semigroup") {
    const IntegratorConfig config;
    const auto flow = gp3::flow_map(decay_system(2), 0.01, config);

    const Eigen::VectorXd origin = flow(vec({0.0, 0.0}));
    CHECK(origin.norm() == 0.0);

    const Eigen::VectorXd stepped = flow(vec({1.0, -2.0}));
    CHECK(stepped[0] == doctest::Approx(std::exp(-0.01)).epsilon(1e-9));
    CHECK(stepped[1] == doctest::Approx(-2.0 * std::exp(-0.01)).epsilon(1e-9));

    const auto flow2 = gp3::flow_map(decay_system(2), 0.02, config);
    const Eigen::VectorXd twice = flow(flow(vec({0.8, 0.3})));
    const Eigen::VectorXd direct = flow2(vec({0.8, 0.3}));
    CHECK((twice - direct).norm() <= 10.0 * config.rel_tol);
}

TEST_CASE("roa baseline: globally stable system converges everywhere") {
    const IntegratorConfig config;
    const Hyperrectangle domain = Hyperrectangle::from_bounds(vec({-2.0, -2.0}), vec({2.0, 2.0}));
    const auto baseline = gp3::roa_baseline(decay_system(2), domain, 25, 1000, 0.01, 0.1,
                                            config, 2);
    REQUIRE(baseline.initial_states.rows() >= 25);
    for (std::size_t i = 0; i < baseline.converged.size(); ++i) {
        CHECK(baseline.converged[i] == 1);
    }
}
