#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "hyperrectangle.hpp"

namespace gp3 {

struct OdeSystem {
    int dimension = 0;
    // dxdt = field(t, x)
    std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)> field;
    std::string name;
};

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_step = 1e-3;
    double max_step = 1e6;

    void validate() const;
};

// Adaptive Bogacki-Shampine RK3(2) with FSAL; steps are clamped to land
// exactly on each sample time, no interpolation. Returns the state at every
// sample time (t = 0 is the initial state if present in sample_times).
std::vector<Eigen::VectorXd> integrate(const OdeSystem& system, const Eigen::VectorXd& x0,
                                       const std::vector<double>& sample_times,
                                       const IntegratorConfig& config);

struct SmibParams {
    double m1 = 1.0;
    double d1 = 20.0;
    double a12 = 10.0;
    double theta1 = 0.05002085680577375;  // arcsin(0.05)
};

// Single machine infinite bus swing dynamics with state [phi_dot, phi]:
// m1 phi_ddot + d1 phi_dot = -a12 (sin(theta1 + phi) - sin(theta1)).
OdeSystem smib_system(const SmibParams& params = {});

// Finite-horizon quadratic trajectory cost: sum_{k=0}^{K} ||x(k dt)||^2.
double lyapunov_value(const OdeSystem& system, const Eigen::VectorXd& x0, int horizon,
                      double dt, const IntegratorConfig& config);

struct LyapunovDataset {
    Eigen::MatrixXd initial_states;  // N x d
    Eigen::VectorXd values;
    int horizon = 0;
    double sample_time = 0.0;
};

// Uniform grid of initial states over the domain (per-axis counts
// proportional to widths, product >= n_points), each labelled with its
// trajectory cost. Evaluations run in parallel.
LyapunovDataset build_lyapunov_dataset(const OdeSystem& system, const Hyperrectangle& domain,
                                       long long n_points, int horizon, double dt,
                                       const IntegratorConfig& config, int workers = 0);

// x0 -> x(dt, x0), usable as ProblemSpec state map.
std::function<Eigen::VectorXd(const Eigen::VectorXd&)> flow_map(const OdeSystem& system,
                                                                double dt,
                                                                const IntegratorConfig& config);

struct RoaBaseline {
    Eigen::MatrixXd initial_states;   // N x d
    std::vector<std::uint8_t> converged;
    std::vector<long long> grid;      // per-axis counts
};

// Trajectory-simulation baseline: integrate steps*dt from each grid state and
// mark converged when the final state lies within the given radius of the
// origin. Divergent trajectories count as non-converged.
RoaBaseline roa_baseline(const OdeSystem& system, const Hyperrectangle& domain,
                         long long grid_points, long long steps, double dt, double radius,
                         const IntegratorConfig& config, int workers = 0);

}  // namespace gp3
