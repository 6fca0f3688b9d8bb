#include "dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "verify.hpp"

namespace gp3 {

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(initial_step > 0.0) || !(max_step > 0.0)) {
        throw std::invalid_argument("IntegratorConfig: all fields must be positive");
    }
}

std::vector<Eigen::VectorXd> integrate(const OdeSystem& system, const Eigen::VectorXd& x0,
                                       const std::vector<double>& sample_times,
                                       const IntegratorConfig& config) {
    config.validate();
    if (x0.size() != system.dimension) {
        throw std::invalid_argument("integrate: state dimension mismatch");
    }
    if (!x0.allFinite()) {
        throw std::invalid_argument("integrate: non-finite initial state");
    }
    for (std::size_t i = 1; i < sample_times.size(); ++i) {
        if (!(sample_times[i] > sample_times[i - 1])) {
            throw std::invalid_argument("integrate: sample times must be increasing");
        }
    }

    std::vector<Eigen::VectorXd> samples;
    samples.reserve(sample_times.size());
    if (sample_times.empty()) return samples;
    if (!(sample_times.front() >= 0.0)) {
        throw std::invalid_argument("integrate: sample times must be >= 0");
    }

    const int d = system.dimension;
    Eigen::VectorXd y = x0;
    Eigen::VectorXd k1(d), k2(d), k3(d), k4(d), y_new(d), err(d), work(d);
    double t = 0.0;
    double h = std::min(config.initial_step, config.max_step);
    std::size_t next_sample = 0;
    bool fsal_valid = false;

    if (sample_times[0] == 0.0) {
        samples.push_back(y);
        ++next_sample;
    }

    while (next_sample < sample_times.size()) {
        const double t_target = sample_times[next_sample];
        double step = std::min(h, config.max_step);
        bool hits_target = false;
        if (step >= t_target - t) {
            step = t_target - t;
            hits_target = true;
        }
        if (!hits_target && step < 1e-14) {
            throw std::runtime_error("integrate: step size underflow (below 1e-14)");
        }

        if (!fsal_valid) {
            system.field(t, y, k1);
        }
        work = y + (0.5 * step) * k1;
        system.field(t + 0.5 * step, work, k2);
        work = y + (0.75 * step) * k2;
        system.field(t + 0.75 * step, work, k3);
        y_new = y + step * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2 + (4.0 / 9.0) * k3);
        system.field(t + step, y_new, k4);

        // Embedded 2nd-order difference drives the controller.
        err = step * ((2.0 / 9.0 - 7.0 / 24.0) * k1 + (1.0 / 3.0 - 1.0 / 4.0) * k2 +
                      (4.0 / 9.0 - 1.0 / 3.0) * k3 - (1.0 / 8.0) * k4);

        if (!y_new.allFinite()) {
            throw std::runtime_error("integrate: non-finite state");
        }

        double err_norm_sq = 0.0;
        for (int i = 0; i < d; ++i) {
            const double scale =
                config.abs_tol + config.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            const double e = err[i] / scale;
            err_norm_sq += e * e;
        }
        const double err_norm = std::sqrt(err_norm_sq / d);

        if (err_norm <= 1.0) {
            t = hits_target ? t_target : t + step;
            y.swap(y_new);
            k1.swap(k4);  // FSAL
            fsal_valid = true;
            if (hits_target) {
                samples.push_back(y);
                ++next_sample;
            }
        }
        const double factor =
            err_norm > 0.0 ? 0.9 * std::pow(err_norm, -1.0 / 3.0) : 5.0;
        h = step * std::clamp(factor, 0.2, 5.0);
        h = std::min(h, config.max_step);
    }
    return samples;
}

OdeSystem smib_system(const SmibParams& params) {
    if (params.m1 == 0.0) {
        throw std::invalid_argument("smib_system: inertia m1 must be nonzero");
    }
    OdeSystem system;
    system.dimension = 2;
    system.name = "smib";
    const double sin_theta = std::sin(params.theta1);
    system.field = [params, sin_theta](double, const Eigen::VectorXd& x, Eigen::VectorXd& dxdt) {
        const double phi_dot = x[0];
        const double phi = x[1];
        dxdt[0] = (-params.d1 * phi_dot -
                   params.a12 * (std::sin(params.theta1 + phi) - sin_theta)) /
                  params.m1;
        dxdt[1] = phi_dot;
    };
    return system;
}

double lyapunov_value(const OdeSystem& system, const Eigen::VectorXd& x0, int horizon,
                      double dt, const IntegratorConfig& config) {
    if (horizon < 0 || !(dt > 0.0)) {
        throw std::invalid_argument("lyapunov_value: need horizon >= 0 and dt > 0");
    }
    double total = x0.squaredNorm();
    if (horizon == 0) return total;
    std::vector<double> times(horizon);
    for (int k = 1; k <= horizon; ++k) times[k - 1] = k * dt;
    const auto states = integrate(system, x0, times, config);
    for (const auto& x : states) total += x.squaredNorm();
    return total;
}

namespace {

Eigen::MatrixXd uniform_grid(const Hyperrectangle& domain, const std::vector<long long>& counts) {
    const int d = domain.dim();
    long long total = 1;
    for (long long c : counts) total *= c;
    Eigen::MatrixXd points(total, d);
    std::vector<long long> index(d, 0);
    const Eigen::VectorXd lower = domain.lower();
    const Eigen::VectorXd upper = domain.upper();
    for (long long p = 0; p < total; ++p) {
        for (int k = 0; k < d; ++k) {
            // Endpoint-inclusive spacing; a single point sits at the center.
            points(p, k) = counts[k] == 1
                               ? domain.center[k]
                               : lower[k] + (upper[k] - lower[k]) * index[k] / (counts[k] - 1);
        }
        for (int k = 0; k < d; ++k) {
            if (++index[k] < counts[k]) break;
            index[k] = 0;
        }
    }
    return points;
}

LyapunovDataset build_lyapunovset_impl(const OdeSystem& system, const Eigen::MatrixXd& points,
                                       int horizon, double dt, const IntegratorConfig& config,
                                       int workers) {
    LyapunovDataset dataset;
    dataset.initial_states = points;
    dataset.values.resize(points.rows());
    dataset.horizon = horizon;
    dataset.sample_time = dt;
    parallel_chunks(points.rows(), workers, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t i = begin; i < end; ++i) {
            dataset.values[static_cast<long long>(i)] =
                lyapunov_value(system, points.row(i).transpose(), horizon, dt, config);
        }
    });
    return dataset;
}

}  // namespace

LyapunovDataset build_lyapunov_dataset(const OdeSystem& system, const Hyperrectangle& domain,
                                       long long n_points, int horizon, double dt,
                                       const IntegratorConfig& config, int workers) {
    const auto counts = sampling_grid_counts(domain, n_points);
    return build_lyapunovset_impl(system, uniform_grid(domain, counts), horizon, dt, config,
                                  workers);
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> flow_map(const OdeSystem& system,
                                                                double dt,
                                                                const IntegratorConfig& config) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("flow_map: dt must be positive");
    }
    return [system, dt, config](const Eigen::VectorXd& x0) {
        return integrate(system, x0, {dt}, config).front();
    };
}

RoaBaseline roa_baseline(const OdeSystem& system, const Hyperrectangle& domain,
                         long long grid_points, long long steps, double dt, double radius,
                         const IntegratorConfig& config, int workers) {
    if (grid_points <= 0 || steps <= 0 || !(dt > 0.0) || !(radius > 0.0)) {
        throw std::invalid_argument("roa_baseline: arguments must be positive");
    }
    RoaBaseline baseline;
    baseline.grid = sampling_grid_counts(domain, grid_points);
    baseline.initial_states = uniform_grid(domain, baseline.grid);
    baseline.converged.assign(baseline.initial_states.rows(), 0);
    const double horizon = static_cast<double>(steps) * dt;
    parallel_chunks(baseline.initial_states.rows(), workers, [&](std::size_t begin,
                                                                 std::size_t end, int) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const auto states =
                    integrate(system, baseline.initial_states.row(i).transpose(), {horizon},
                              config);
                baseline.converged[i] = states.front().norm() <= radius ? 1 : 0;
            } catch (const std::runtime_error&) {
                baseline.converged[i] = 0;  // divergence is a result, not an error
            }
        }
    });
    return baseline;
}

}  // namespace gp3
