#include "kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace gp3 {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.23606797749979;

void check_dims(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != spec.dim() || y.size() != spec.dim()) {
        throw std::invalid_argument("kernel: input dimension does not match length scales");
    }
}

}  // namespace

const char* kernel_family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::SquaredExponential: return "squared_exponential";
        case KernelFamily::Matern32: return "matern32";
        case KernelFamily::Matern52: return "matern52";
    }
    return "unknown";
}

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "squared_exponential" || name == "se") return KernelFamily::SquaredExponential;
    if (name == "matern32" || name == "m32") return KernelFamily::Matern32;
    if (name == "matern52" || name == "m52") return KernelFamily::Matern52;
    throw std::invalid_argument("unknown kernel family: " + name);
}

KernelSpec::KernelSpec(KernelFamily family_, double signal_variance_, Eigen::VectorXd length_scales_)
    : family(family_), signal_variance(signal_variance_), length_scales(std::move(length_scales_)) {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw std::invalid_argument("KernelSpec: signal variance must be positive");
    }
    if (length_scales.size() < 1) {
        throw std::invalid_argument("KernelSpec: need at least one length scale");
    }
    if (!((length_scales.array() > 0.0).all()) || !length_scales.allFinite()) {
        throw std::invalid_argument("KernelSpec: length scales must be positive");
    }
}

double ard_distance(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_dims(spec, x, y);
    return ((x - y).array() / spec.length_scales.array()).matrix().norm();
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_dims(spec, x, y);
    const double r2 = ((x - y).array() / spec.length_scales.array()).square().sum();
    switch (spec.family) {
        case KernelFamily::SquaredExponential:
            return spec.signal_variance * std::exp(-0.5 * r2);
        case KernelFamily::Matern32: {
            const double r = std::sqrt(r2);
            return spec.signal_variance * (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
        }
        case KernelFamily::Matern52: {
            const double r = std::sqrt(r2);
            return spec.signal_variance * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) *
                   std::exp(-kSqrt5 * r);
        }
    }
    throw std::logic_error("kernel_eval: unreachable");
}

double kernel_partial(const KernelSpec& spec, const Eigen::VectorXd& x_train,
                      const Eigen::VectorXd& x, int j) {
    check_dims(spec, x_train, x);
    if (j < 0 || j >= spec.dim()) {
        throw std::invalid_argument("kernel_partial: dimension index out of range");
    }
    const Eigen::ArrayXd delta = (x_train - x).array();
    const double r2 = (delta / spec.length_scales.array()).square().sum();
    const double lj2 = spec.length_scales[j] * spec.length_scales[j];
    const double dj = delta[j];
    switch (spec.family) {
        case KernelFamily::SquaredExponential:
            return spec.signal_variance * (dj / lj2) * std::exp(-0.5 * r2);
        case KernelFamily::Matern32: {
            const double r = std::sqrt(r2);
            return 3.0 * spec.signal_variance * (dj / lj2) * std::exp(-kSqrt3 * r);
        }
        case KernelFamily::Matern52: {
            const double r = std::sqrt(r2);
            return (5.0 / 3.0) * spec.signal_variance * (dj / lj2) * (1.0 + kSqrt5 * r) *
                   std::exp(-kSqrt5 * r);
        }
    }
    throw std::logic_error("kernel_partial: unreachable");
}

double maximum_point(const KernelSpec& spec, int j) {
    if (j < 0 || j >= spec.dim()) {
        throw std::invalid_argument("maximum_point: dimension index out of range");
    }
    const double lj = spec.length_scales[j];
    switch (spec.family) {
        case KernelFamily::SquaredExponential: return lj;
        case KernelFamily::Matern32: return lj / kSqrt3;
        case KernelFamily::Matern52: return (5.0 + kSqrt5) / 10.0 * lj;
    }
    throw std::logic_error("maximum_point: unreachable");
}

namespace detail {

double peak_offset_scaled(KernelFamily family, double v2) {
    switch (family) {
        case KernelFamily::SquaredExponential:
            // Separable: the peak does not move with the off-axis distance.
            return 1.0;
        case KernelFamily::Matern32:
            // Root of sqrt(3) s^2 = sqrt(s^2 + v2).
            return std::sqrt((1.0 + std::sqrt(1.0 + 12.0 * v2)) / 6.0);
        case KernelFamily::Matern52:
            // Root of 5 s^2 - 1 = sqrt(5) sqrt(s^2 + v2).
            return std::sqrt((3.0 + std::sqrt(5.0 + 20.0 * v2)) / 10.0);
    }
    throw std::logic_error("peak_offset_scaled: unreachable");
}

double derivative_profile(KernelFamily family, double s, double v2) {
    const double r2 = s * s + v2;
    switch (family) {
        case KernelFamily::SquaredExponential:
            return s * std::exp(-0.5 * r2);
        case KernelFamily::Matern32:
            return 3.0 * s * std::exp(-kSqrt3 * std::sqrt(r2));
        case KernelFamily::Matern52: {
            const double r = std::sqrt(r2);
            return (5.0 / 3.0) * s * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
        }
    }
    throw std::logic_error("derivative_profile: unreachable");
}

}  // namespace detail

DerivBound derivative_bounds(const KernelSpec& spec, const Eigen::VectorXd& x_train,
                             const Hyperrectangle& cell, int j) {
    check_dims(spec, x_train, cell.center);
    if (j < 0 || j >= spec.dim()) {
        throw std::invalid_argument("derivative_bounds: dimension index out of range");
    }
    if ((cell.half_widths.array() < 0.0).any()) {
        throw std::invalid_argument("derivative_bounds: invalid cell");
    }

    const int d = spec.dim();
    const double lj = spec.length_scales[j];
    const double delta_j = x_train[j] - cell.center[j];

    // Off-axis squared ARD distance range over the cell, per-axis clamped.
    double v2min = 0.0;
    double v2max = 0.0;
    for (int k = 0; k < d; ++k) {
        if (k == j) continue;
        const double ad = std::abs(x_train[k] - cell.center[k]);
        const double bk = cell.half_widths[k];
        const double lk = spec.length_scales[k];
        const double near = std::max(0.0, ad - bk) / lk;
        const double far = (ad + bk) / lk;
        v2min += near * near;
        v2max += far * far;
    }

    // Scaled signed offset range after reflecting to delta_j >= 0; the T sign
    // matrix action is undone at the end.
    const double dj = std::abs(delta_j);
    const double a = (dj - cell.half_widths[j]) / lj;
    const double b = (dj + cell.half_widths[j]) / lj;

    const double s_peak = detail::peak_offset_scaled(spec.family, v2min);
    const double scale = spec.signal_variance / lj;

    // Maximum: positive lobe, nearest off-axis face, peak clamped to [a, b].
    const double s_up = std::clamp(s_peak, a, b);
    double upper = scale * detail::derivative_profile(spec.family, s_up, v2min);

    // Minimum: endpoints on the farthest off-axis face; if the cell straddles
    // the training point in dimension j (a < 0), the negative lobe's extreme
    // at the nearest face is also a candidate.
    double lower = scale * detail::derivative_profile(spec.family, b, v2max);
    if (a >= 0.0) {
        lower = std::min(lower, scale * detail::derivative_profile(spec.family, a, v2max));
    } else {
        const double s_neg = std::min(s_peak, -a);
        lower = std::min(lower, -scale * detail::derivative_profile(spec.family, s_neg, v2min));
    }

    // Undo the reflection: negate and swap rows (the paper's T matrix). For
    // delta_j = 0 the range is symmetric and already its own reflection.
    if (delta_j < 0.0) {
        const double t = upper;
        upper = -lower;
        lower = -t;
    }

    if (lower > upper) {
        throw std::runtime_error("derivative_bounds: internal consistency violation (lower > upper)");
    }
    return DerivBound{upper, lower};
}

}  // namespace gp3
