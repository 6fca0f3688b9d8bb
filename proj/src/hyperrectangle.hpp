#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace gp3 {

// Axis-aligned box {x : |x - center| <= half_widths element-wise}.
struct Hyperrectangle {
    Eigen::VectorXd center;
    Eigen::VectorXd half_widths;

    Hyperrectangle() = default;

    Hyperrectangle(Eigen::VectorXd c, Eigen::VectorXd b)
        : center(std::move(c)), half_widths(std::move(b)) {
        if (center.size() != half_widths.size()) {
            throw std::invalid_argument("Hyperrectangle: center/half_widths size mismatch");
        }
        if ((half_widths.array() < 0.0).any()) {
            throw std::invalid_argument("Hyperrectangle: negative half width");
        }
    }

    static Hyperrectangle from_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
        if (lower.size() != upper.size() || (upper.array() < lower.array()).any()) {
            throw std::invalid_argument("Hyperrectangle: invalid bounds");
        }
        return Hyperrectangle(0.5 * (lower + upper), 0.5 * (upper - lower));
    }

    int dim() const { return static_cast<int>(center.size()); }

    // Euclidean norm of the half-width vector: radius of the circumscribed ball.
    double radius() const { return half_widths.norm(); }

    double volume() const { return (2.0 * half_widths.array()).prod(); }

    bool contains(const Eigen::VectorXd& x) const {
        return ((x - center).array().abs() <= half_widths.array() + 0.0).all();
    }

    Eigen::VectorXd lower() const { return center - half_widths; }
    Eigen::VectorXd upper() const { return center + half_widths; }
};

// Dyadic split into 2^d children with halved half-widths; children partition
// the parent. Throws if any dimension has zero width.
std::vector<Hyperrectangle> refine(const Hyperrectangle& cell);

}  // namespace gp3
