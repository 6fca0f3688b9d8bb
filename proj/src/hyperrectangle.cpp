#include "hyperrectangle.hpp"

namespace gp3 {

std::vector<Hyperrectangle> refine(const Hyperrectangle& cell) {
    const int d = cell.dim();
    if ((cell.half_widths.array() <= 0.0).any()) {
        throw std::invalid_argument("refine: cell has a zero-width dimension");
    }
    const Eigen::VectorXd child_b = 0.5 * cell.half_widths;
    std::vector<Hyperrectangle> children;
    children.reserve(std::size_t{1} << d);
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Eigen::VectorXd c = cell.center;
        for (int k = 0; k < d; ++k) {
            c[k] += ((mask >> k) & 1U) ? child_b[k] : -child_b[k];
        }
        children.emplace_back(std::move(c), child_b);
    }
    return children;
}

}  // namespace gp3
