#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "gp.hpp"
#include "hyperrectangle.hpp"
#include "interval.hpp"

namespace gp3 {

enum class CellStatus : std::uint8_t {
    Satisfied = 0,
    MinSizeReached = 1,
    AssumedVerified = 2,
    Violated = 3,
};

const char* cell_status_name(CellStatus status);

struct CellResult {
    Hyperrectangle cell;
    double lo;
    double hi;
    double l_mu;
    CellStatus status;
    int depth;
};

// Cells verified to lie fully inside an exclusion region are marked
// AssumedVerified without evaluation. Ball inclusion uses the conservative
// test ||c - center|| + ||b|| <= radius.
struct ExclusionBall {
    Eigen::VectorXd center;
    double radius;
};
struct ExclusionBox {
    Hyperrectangle box;
};
using Exclusion = std::variant<ExclusionBall, ExclusionBox>;

bool cell_inside_exclusion(const Eigen::VectorXd& center, const Eigen::VectorXd& half_widths,
                           const Exclusion& exclusion);

// Problem of bounding g(f(x)) - mu(x) over a domain. When g_is_mean the
// engine derives the local Lipschitz constant of g on the image box itself;
// otherwise a constant or per-cell function must be supplied.
struct ProblemSpec {
    bool g_is_mean = true;
    std::function<double(const Eigen::VectorXd&)> g;

    bool f_is_identity = true;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;

    double lipschitz_f = 1.0;
    std::function<double(const Hyperrectangle&)> lipschitz_f_fn;

    double lipschitz_g = 0.0;
    std::function<double(const Hyperrectangle&)> lipschitz_g_fn;

    // Target bound functions of the cell center; empty means +infinity.
    std::function<double(const Eigen::VectorXd&)> target_lower;
    std::function<double(const Eigen::VectorXd&)> target_upper;

    double min_cell_size = 1e-9;  // b_min, on ||b||
    Hyperrectangle domain;
    long long initial_cells = 1;  // M
    int max_depth = 60;           // hard refinement cap, reported when hit
};

// Flat, struct-of-arrays cell storage: reports can reach 10^7+ cells.
struct VerificationReport {
    int dim = 0;
    std::vector<double> centers;      // size * dim
    std::vector<double> half_widths;  // size * dim
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> l_mu;
    std::vector<CellStatus> status;
    std::vector<std::uint16_t> depth;

    long long cells_evaluated = 0;
    int max_depth = 0;
    double wall_time_seconds = 0.0;
    std::vector<long long> initial_grid;
    bool depth_cap_hit = false;

    std::size_t size() const { return lo.size(); }
    Eigen::Map<const Eigen::VectorXd> center(std::size_t i) const {
        return {centers.data() + i * dim, dim};
    }
    Eigen::Map<const Eigen::VectorXd> half_width(std::size_t i) const {
        return {half_widths.data() + i * dim, dim};
    }
    CellResult cell(std::size_t i) const;
};

struct EngineSettings {
    int workers = 0;          // <= 0: hardware concurrency
    double prune_rel = 1e-12; // relative tail-pruning tolerance, 0 disables
};

namespace detail {
struct PruneTable;
}

// Theorem-2 evaluator with reusable per-cell workspace. One instance per
// thread; the model and prune table are shared read-only.
class LipschitzEvaluator {
  public:
    LipschitzEvaluator(const GpModel& model, double prune_rel);
    LipschitzEvaluator(const GpModel& model, std::shared_ptr<const detail::PruneTable> table);
    ~LipschitzEvaluator();
    LipschitzEvaluator(LipschitzEvaluator&&) noexcept;

    double evaluate(const Eigen::VectorXd& center, const Eigen::VectorXd& half_widths);
    double evaluate(const Hyperrectangle& cell) { return evaluate(cell.center, cell.half_widths); }

    std::shared_ptr<const detail::PruneTable> table() const { return table_; }
    // Upper bound on the total pruning slack added to any directional row.
    double slack_cap() const;

  private:
    template <KernelFamily Family>
    double evaluate_impl(const Eigen::VectorXd& center, const Eigen::VectorXd& half_widths);

    const GpModel* model_;
    std::shared_ptr<const detail::PruneTable> table_;
    std::vector<double> a_s_, b_s_, sign_, mlo2_, mhi2_;  // n * d scratch
    std::vector<double> smin_, smax_;                     // n scratch
    std::vector<double> coef_;                            // 3 * n scratch
    // Aligned so the vectorized exp takes the same code path in every
    // instance; results must be bit-identical across worker counts.
    Eigen::ArrayXd args_;
    std::vector<int> active_;
};

// Local Lipschitz constant of the posterior mean over the cell: interval
// accumulation of the per-point derivative bounds with the row swap for
// negative weights, max(|row|) per dimension, Euclidean combination.
double local_lipschitz(const GpModel& model, const Hyperrectangle& cell,
                       double prune_rel = 1e-12);

// Certified range of g(f(x)) - mu(x) over the cell given a local Lipschitz
// constant of the mean: center value +- (L_f L_g + L_mu) ||b||.
std::pair<double, double> cell_bounds(const ProblemSpec& problem, const GpModel& model,
                                      const Hyperrectangle& cell, double l_mu);

// Initial axis-aligned grid with per-axis counts proportional to the domain
// widths and total cell count >= requested.
std::vector<long long> sampling_grid_counts(const Hyperrectangle& domain, long long requested);

// Multi-resolution bound calculation: wave-parallel evaluation of Theorem 1/2
// over a refining grid. Cells stop as Satisfied (targets met), Violated
// (targets provably missed everywhere in the cell), MinSizeReached, or
// AssumedVerified (inside an exclusion, skipped without evaluation).
VerificationReport run_analysis(const ProblemSpec& problem, const GpModel& model,
                                const std::vector<Exclusion>& exclusions = {},
                                const EngineSettings& settings = {});

struct EnvelopePoint {
    long long cells;
    double lipschitz;
};
struct EnvelopeResult {
    double global;  // final-wave maximum, a valid Lipschitz constant on X
    std::vector<EnvelopePoint> curve;
};

// Uniform refinement of X reporting the max local Lipschitz constant per
// wave, until the next wave would exceed the cell budget.
EnvelopeResult lipschitz_envelope(const GpModel& model, const Hyperrectangle& domain,
                                  long long cell_budget, const EngineSettings& settings = {});

// Certified lower bound on min of mu over a union of cells:
// min_i mu(c_i) - L_mu(cell_i) ||b_i||.
double certified_min(const GpModel& model, const std::vector<Hyperrectangle>& cells,
                     const EngineSettings& settings = {});
double certified_min(const GpModel& model, const VerificationReport& report,
                     const std::vector<std::size_t>& cell_indices,
                     const EngineSettings& settings = {});

}  // namespace gp3
