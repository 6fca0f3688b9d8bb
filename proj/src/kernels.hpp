#pragma once

#include <Eigen/Core>

#include "hyperrectangle.hpp"

namespace gp3 {

enum class KernelFamily {
    SquaredExponential,
    Matern32,
    Matern52,
};

const char* kernel_family_name(KernelFamily family);
KernelFamily kernel_family_from_name(const std::string& name);

// Stationary ARD kernel: family, signal variance sigma_f^2 and per-dimension
// length scales. Immutable after construction.
struct KernelSpec {
    KernelFamily family;
    double signal_variance;
    Eigen::VectorXd length_scales;

    KernelSpec(KernelFamily family_, double signal_variance_, Eigen::VectorXd length_scales_);

    int dim() const { return static_cast<int>(length_scales.size()); }
};

// Bounds on dk(x_train, .)/dx_j over a hyperrectangle; upper stored first.
struct DerivBound {
    double upper;
    double lower;
};

// ARD-weighted distance r = sqrt(sum_i (x_i - y_i)^2 / l_i^2).
double ard_distance(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Kernel value k(x, y). At r = 0 all families return sigma_f^2.
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Exact partial derivative dk(x_train, x)/dx_j (derivative in the second
// argument), j zero-based.
double kernel_partial(const KernelSpec& spec, const Eigen::VectorXd& x_train,
                      const Eigen::VectorXd& x, int j);

// Distance at which the univariate derivative magnitude peaks: l_j for the
// squared exponential, l_j/sqrt(3) for Matern 3/2, (5+sqrt(5))l_j/10 for
// Matern 5/2.
double maximum_point(const KernelSpec& spec, int j);

// Range of dk(x_train, .)/dx_j over the cell. The returned bounds are the
// exact box extrema: the derivative factors through the signed offset in the
// derived direction and the off-axis ARD distance, is odd and unimodal in the
// former and monotone in the latter, so the extrema are attained at clamped
// candidates. Throws if the computed lower exceeds upper.
DerivBound derivative_bounds(const KernelSpec& spec, const Eigen::VectorXd& x_train,
                             const Hyperrectangle& cell, int j);

namespace detail {

// Scaled derived-direction offset at which |dk/dx_j| peaks for a given
// squared off-axis ARD distance v2 (offset in units of l_j).
double peak_offset_scaled(KernelFamily family, double v2);

// Derivative value at scaled signed offset s and squared off-axis distance
// v2: dk/dx_j = (sigma_f^2 / l_j) * profile(s, v2). Returns profile * s-sign
// convention folded in (odd in s).
double derivative_profile(KernelFamily family, double s, double v2);

}  // namespace detail

}  // namespace gp3
