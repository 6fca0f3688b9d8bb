#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "parallel.hpp"

namespace gp3 {

namespace detail {

// Per-point squared-distance thresholds beyond which a training point's
// contribution to any derivative row is below the per-point allowance; such
// points are skipped and the allowance is added to the row as certified
// slack. allowance scales with sum|lambda| so a zero model prunes at zero
// cost and bounds stay exact.
struct PruneTable {
    double allowance = 0.0;
    Eigen::ArrayXd threshold_r2;
};

namespace {

double cap_profile(KernelFamily family, double s) {
    switch (family) {
        case KernelFamily::SquaredExponential: return s * std::exp(-0.5 * s * s);
        case KernelFamily::Matern32: return 3.0 * s * std::exp(-1.7320508075688772 * s);
        case KernelFamily::Matern52:
            return (5.0 / 3.0) * s * (1.0 + 2.23606797749979 * s) *
                   std::exp(-2.23606797749979 * s);
    }
    return 0.0;
}

double cap_peak(KernelFamily family) {
    switch (family) {
        case KernelFamily::SquaredExponential: return cap_profile(family, 1.0);
        case KernelFamily::Matern32: return cap_profile(family, 1.0 / 1.7320508075688772);
        case KernelFamily::Matern52: return cap_profile(family, (5.0 + 2.23606797749979) / 10.0);
    }
    return 0.0;
}

constexpr double kPruneFloor = 2.0;   // stay on the decreasing branch
constexpr double kPruneCeil = 60.0;   // profile underflows well before this

std::shared_ptr<const PruneTable> build_prune_table(const GpModel& model, double prune_rel) {
    const int n = model.size();
    auto table = std::make_shared<PruneTable>();
    table->threshold_r2 = Eigen::ArrayXd::Constant(n, kPruneCeil * kPruneCeil);

    const double l_min = model.spec().length_scales.minCoeff();
    const double unit = model.spec().signal_variance / l_min;
    const double sum_abs = model.weights().array().abs().sum();
    table->allowance = prune_rel * unit * cap_peak(model.spec().family) * sum_abs / n;
    if (!(table->allowance > 0.0)) {
        table->allowance = 0.0;
        return table;
    }

    const KernelFamily family = model.spec().family;
    for (int i = 0; i < n; ++i) {
        const double w = std::abs(model.weights()[i]);
        if (w == 0.0) {
            table->threshold_r2[i] = 0.0;  // contributes nothing anywhere
            continue;
        }
        const double target = table->allowance / (w * unit);
        if (target >= cap_profile(family, kPruneFloor)) {
            table->threshold_r2[i] = kPruneFloor * kPruneFloor;
            continue;
        }
        if (target <= cap_profile(family, kPruneCeil)) {
            continue;  // keep the ceiling: effectively never pruned
        }
        double lo = kPruneFloor, hi = kPruneCeil;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cap_profile(family, mid) > target ? lo : hi) = mid;
        }
        table->threshold_r2[i] = hi * hi;
    }
    return table;
}

}  // namespace
}  // namespace detail

const char* cell_status_name(CellStatus status) {
    switch (status) {
        case CellStatus::Satisfied: return "satisfied";
        case CellStatus::MinSizeReached: return "min_size_reached";
        case CellStatus::AssumedVerified: return "assumed_verified";
        case CellStatus::Violated: return "violated";
    }
    return "unknown";
}

CellResult VerificationReport::cell(std::size_t i) const {
    return CellResult{Hyperrectangle(center(i), half_width(i)), lo[i], hi[i], l_mu[i],
                      status[i], depth[i]};
}

bool cell_inside_exclusion(const Eigen::VectorXd& center, const Eigen::VectorXd& half_widths,
                           const Exclusion& exclusion) {
    if (const auto* ball = std::get_if<ExclusionBall>(&exclusion)) {
        return (center - ball->center).norm() + half_widths.norm() <= ball->radius;
    }
    const auto& box = std::get<ExclusionBox>(exclusion).box;
    return ((center - box.center).array().abs() + half_widths.array() <=
            box.half_widths.array())
        .all();
}

LipschitzEvaluator::LipschitzEvaluator(const GpModel& model, double prune_rel)
    : LipschitzEvaluator(model, detail::build_prune_table(model, prune_rel)) {}

LipschitzEvaluator::LipschitzEvaluator(const GpModel& model,
                                       std::shared_ptr<const detail::PruneTable> table)
    : model_(&model), table_(std::move(table)) {
    const std::size_t n = static_cast<std::size_t>(model.size());
    const std::size_t nd = n * static_cast<std::size_t>(model.dim());
    a_s_.resize(nd);
    b_s_.resize(nd);
    sign_.resize(nd);
    mlo2_.resize(nd);
    mhi2_.resize(nd);
    smin_.resize(n);
    smax_.resize(n);
    coef_.resize(3 * n);
    args_.resize(3 * n);
    active_.reserve(n);
}

LipschitzEvaluator::~LipschitzEvaluator() = default;
LipschitzEvaluator::LipschitzEvaluator(LipschitzEvaluator&&) noexcept = default;

double LipschitzEvaluator::slack_cap() const {
    return table_->allowance * model_->size();
}

template <KernelFamily Family>
double LipschitzEvaluator::evaluate_impl(const Eigen::VectorXd& center,
                                         const Eigen::VectorXd& half_widths) {
    const int n = model_->size();
    const int d = model_->dim();
    const auto& inputs = model_->train().inputs;
    const auto& scales = model_->spec().length_scales;
    const double* lambda = model_->weights().data();
    const double sigma2 = model_->spec().signal_variance;

    for (int i = 0; i < n; ++i) {
        double smin = 0.0, smax = 0.0;
        const std::size_t row = static_cast<std::size_t>(i) * d;
        for (int k = 0; k < d; ++k) {
            const double delta = inputs(i, k) - center[k];
            const double ad = std::abs(delta);
            const double inv_l = 1.0 / scales[k];
            const double as = (ad - half_widths[k]) * inv_l;
            const double bs = (ad + half_widths[k]) * inv_l;
            a_s_[row + k] = as;
            b_s_[row + k] = bs;
            sign_[row + k] = delta < 0.0 ? -1.0 : 1.0;
            const double mlo = std::max(0.0, as);
            mlo2_[row + k] = mlo * mlo;
            mhi2_[row + k] = bs * bs;
            smin += mlo * mlo;
            smax += bs * bs;
        }
        smin_[i] = smin;
        smax_[i] = smax;
    }

    active_.clear();
    const double* threshold = table_->threshold_r2.data();
    for (int i = 0; i < n; ++i) {
        if (smin_[i] < threshold[i]) active_.push_back(i);
    }
    const double slack =
        table_->allowance * static_cast<double>(n - static_cast<int>(active_.size()));
    const std::size_t m = active_.size();

    double sum_sq = 0.0;
    for (int j = 0; j < d; ++j) {
        const double scale = sigma2 / scales[j];
        for (std::size_t idx = 0; idx < m; ++idx) {
            const int i = active_[idx];
            const std::size_t row = static_cast<std::size_t>(i) * d + j;
            const double v2min = std::max(0.0, smin_[i] - mlo2_[row]);
            const double v2max = std::max(0.0, smax_[i] - mhi2_[row]);
            const double as = a_s_[row];
            const double bs = b_s_[row];
            double s_peak;
            if constexpr (Family == KernelFamily::SquaredExponential) {
                s_peak = 1.0;
            } else if constexpr (Family == KernelFamily::Matern32) {
                s_peak = std::sqrt((1.0 + std::sqrt(1.0 + 12.0 * v2min)) / 6.0);
            } else {
                s_peak = std::sqrt((3.0 + std::sqrt(5.0 + 20.0 * v2min)) / 10.0);
            }
            const double s0 = std::clamp(s_peak, as, bs);
            double s1, v21;
            if (as >= 0.0) {
                s1 = as;
                v21 = v2max;
            } else {
                s1 = -std::min(s_peak, -as);
                v21 = v2min;
            }
            coef_[idx] = s0;
            coef_[m + idx] = s1;
            coef_[2 * m + idx] = bs;
            args_[idx] = s0 * s0 + v2min;
            args_[m + idx] = s1 * s1 + v21;
            args_[2 * m + idx] = bs * bs + v2max;
        }

        // Batched profile evaluation over all candidates.
        auto args = args_.head(3 * m);
        if constexpr (Family == KernelFamily::SquaredExponential) {
            args = (-0.5 * args).exp();
        } else if constexpr (Family == KernelFamily::Matern32) {
            args = 3.0 * (-1.7320508075688772 * args.sqrt()).exp();
        } else {
            const Eigen::ArrayXd r = args.sqrt();
            args = (5.0 / 3.0) * (1.0 + 2.23606797749979 * r) * (-2.23606797749979 * r).exp();
        }

        double row_lo = -slack, row_hi = slack;
        for (std::size_t idx = 0; idx < m; ++idx) {
            const int i = active_[idx];
            const std::size_t row = static_cast<std::size_t>(i) * d + j;
            double up = scale * coef_[idx] * args_[idx];
            const double lo1 = scale * coef_[m + idx] * args_[m + idx];
            const double lo2 = scale * coef_[2 * m + idx] * args_[2 * m + idx];
            double lo = std::min(lo1, lo2);
            if (sign_[row] < 0.0) {
                const double t = up;
                up = -lo;
                lo = -t;
            }
            const double w = lambda[i];
            if (w > 0.0) {
                row_hi += w * up;
                row_lo += w * lo;
            } else {
                row_hi += w * lo;
                row_lo += w * up;
            }
        }
        const double worst = std::max(std::abs(row_lo), std::abs(row_hi));
        sum_sq += worst * worst;
    }
    return std::sqrt(sum_sq);
}

double LipschitzEvaluator::evaluate(const Eigen::VectorXd& center,
                                    const Eigen::VectorXd& half_widths) {
    if (center.size() != model_->dim() || half_widths.size() != model_->dim()) {
        throw std::invalid_argument("local_lipschitz: cell dimension mismatch");
    }
    switch (model_->spec().family) {
        case KernelFamily::SquaredExponential:
            return evaluate_impl<KernelFamily::SquaredExponential>(center, half_widths);
        case KernelFamily::Matern32:
            return evaluate_impl<KernelFamily::Matern32>(center, half_widths);
        case KernelFamily::Matern52:
            return evaluate_impl<KernelFamily::Matern52>(center, half_widths);
    }
    throw std::logic_error("local_lipschitz: unreachable");
}

double local_lipschitz(const GpModel& model, const Hyperrectangle& cell, double prune_rel) {
    LipschitzEvaluator evaluator(model, prune_rel);
    return evaluator.evaluate(cell);
}

namespace {

double eval_target(const std::function<double(const Eigen::VectorXd&)>& fn,
                   const Eigen::VectorXd& c) {
    return fn ? fn(c) : std::numeric_limits<double>::infinity();
}

struct BoundEvaluation {
    double lo;
    double hi;
    double l_mu;
};

BoundEvaluation evaluate_cell(const ProblemSpec& problem, const GpModel& model,
                              const Eigen::VectorXd& c, const Eigen::VectorXd& b,
                              LipschitzEvaluator& evaluator) {
    const double l_mu = evaluator.evaluate(c, b);
    const double radius = b.norm();

    Hyperrectangle cell_view(c, b);
    const double l_f =
        problem.lipschitz_f_fn ? problem.lipschitz_f_fn(cell_view) : problem.lipschitz_f;

    Eigen::VectorXd fc = problem.f_is_identity ? c : problem.f(c);
    if (fc.size() != c.size() || !fc.allFinite()) {
        throw std::runtime_error("run_analysis: non-finite state map value at cell center");
    }

    const double mu_c = model.mean(c);
    double g_val, l_g;
    // The mean's Lipschitz constant on the image region: the image of the
    // cell lies in the ball of radius L_f ||b|| around f(c), so use the box
    // circumscribing that ball.
    const Hyperrectangle image_box(fc, Eigen::VectorXd::Constant(c.size(), l_f * radius));
    if (problem.g_is_mean) {
        g_val = model.mean(fc);
        l_g = evaluator.evaluate(image_box.center, image_box.half_widths);
    } else {
        g_val = problem.g(fc);
        l_g = problem.lipschitz_g_fn ? problem.lipschitz_g_fn(image_box) : problem.lipschitz_g;
    }
    if (!std::isfinite(g_val) || !std::isfinite(mu_c)) {
        throw std::runtime_error("run_analysis: non-finite g or mean evaluation at cell center");
    }

    const Interval range = Interval::point(g_val - mu_c) +
                           (l_f * l_g + l_mu) * radius * Interval(-1.0, 1.0);
    return BoundEvaluation{range.lo, range.hi, l_mu};
}

}  // namespace

std::pair<double, double> cell_bounds(const ProblemSpec& problem, const GpModel& model,
                                      const Hyperrectangle& cell, double l_mu) {
    const double radius = cell.half_widths.norm();
    const double l_f =
        problem.lipschitz_f_fn ? problem.lipschitz_f_fn(cell) : problem.lipschitz_f;
    Eigen::VectorXd fc = problem.f_is_identity ? cell.center : problem.f(cell.center);
    if (!fc.allFinite()) {
        throw std::runtime_error("cell_bounds: non-finite state map value");
    }
    const double mu_c = model.mean(cell.center);
    const Hyperrectangle image_box(fc,
                                   Eigen::VectorXd::Constant(cell.dim(), l_f * radius));
    double g_val, l_g;
    if (problem.g_is_mean) {
        g_val = model.mean(fc);
        l_g = local_lipschitz(model, image_box);
    } else {
        g_val = problem.g(fc);
        l_g = problem.lipschitz_g_fn ? problem.lipschitz_g_fn(image_box) : problem.lipschitz_g;
    }
    if (!std::isfinite(g_val) || !std::isfinite(mu_c)) {
        throw std::runtime_error("cell_bounds: non-finite evaluation");
    }
    const Interval range = Interval::point(g_val - mu_c) +
                           (l_f * l_g + l_mu) * radius * Interval(-1.0, 1.0);
    return {range.lo, range.hi};
}

std::vector<long long> sampling_grid_counts(const Hyperrectangle& domain, long long requested) {
    const int d = domain.dim();
    std::vector<long long> counts(d, 1);
    if (requested <= 1) return counts;
    const Eigen::ArrayXd widths = 2.0 * domain.half_widths.array();
    if ((widths <= 0.0).any()) return counts;
    const double h = std::pow(widths.prod() / static_cast<double>(requested), 1.0 / d);
    for (int k = 0; k < d; ++k) {
        counts[k] = std::max<long long>(1, static_cast<long long>(std::ceil(widths[k] / h - 1e-12)));
    }
    auto total = [&] {
        long long t = 1;
        for (long long c : counts) t *= c;
        return t;
    };
    while (total() < requested) {
        int widest = 0;
        double best = -1.0;
        for (int k = 0; k < d; ++k) {
            const double per = widths[k] / static_cast<double>(counts[k]);
            if (per > best) {
                best = per;
                widest = k;
            }
        }
        ++counts[widest];
    }
    return counts;
}

namespace {

// Flat frontier of cells at a common refinement wave.
struct Frontier {
    int dim = 0;
    std::vector<double> centers;
    std::vector<double> half_widths;
    std::vector<std::uint16_t> depth;
    std::size_t size() const { return depth.size(); }
};

Frontier initial_frontier(const Hyperrectangle& domain, const std::vector<long long>& counts) {
    const int d = domain.dim();
    Frontier frontier;
    frontier.dim = d;
    long long total = 1;
    for (long long c : counts) total *= c;
    frontier.centers.resize(static_cast<std::size_t>(total) * d);
    frontier.half_widths.resize(static_cast<std::size_t>(total) * d);
    frontier.depth.assign(static_cast<std::size_t>(total), 0);

    Eigen::VectorXd cell_b(d);
    for (int k = 0; k < d; ++k) {
        cell_b[k] = domain.half_widths[k] / static_cast<double>(counts[k]);
    }
    const Eigen::VectorXd lower = domain.lower();
    std::vector<long long> index(d, 0);
    for (long long cell = 0; cell < total; ++cell) {
        const std::size_t row = static_cast<std::size_t>(cell) * d;
        for (int k = 0; k < d; ++k) {
            frontier.centers[row + k] = lower[k] + (2.0 * index[k] + 1.0) * cell_b[k];
            frontier.half_widths[row + k] = cell_b[k];
        }
        for (int k = 0; k < d; ++k) {
            if (++index[k] < counts[k]) break;
            index[k] = 0;
        }
    }
    return frontier;
}

}  // namespace

VerificationReport run_analysis(const ProblemSpec& problem, const GpModel& model,
                                const std::vector<Exclusion>& exclusions,
                                const EngineSettings& settings) {
    if (problem.domain.dim() != model.dim()) {
        throw std::invalid_argument("run_analysis: domain dimension does not match model");
    }
    if (!(problem.min_cell_size > 0.0)) {
        throw std::invalid_argument("run_analysis: min_cell_size must be positive");
    }
    const auto t_start = std::chrono::steady_clock::now();
    const int d = problem.domain.dim();
    const int workers = resolve_workers(settings.workers);

    auto prune_table = detail::build_prune_table(model, settings.prune_rel);
    std::vector<LipschitzEvaluator> evaluators;
    evaluators.reserve(workers);
    for (int w = 0; w < workers; ++w) evaluators.emplace_back(model, prune_table);

    VerificationReport report;
    report.dim = d;
    report.initial_grid = sampling_grid_counts(problem.domain, problem.initial_cells);
    Frontier frontier = initial_frontier(problem.domain, report.initial_grid);

    constexpr CellStatus kRefine = static_cast<CellStatus>(255);
    std::vector<double> lo, hi, lmu;
    std::vector<CellStatus> status;
    std::atomic<long long> evaluated{0};
    std::atomic<bool> cap_hit{false};

    while (frontier.size() > 0) {
        const std::size_t n = frontier.size();
        lo.assign(n, 0.0);
        hi.assign(n, 0.0);
        lmu.assign(n, 0.0);
        status.assign(n, CellStatus::Satisfied);

        parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, int worker) {
            LipschitzEvaluator& evaluator = evaluators[worker];
            Eigen::VectorXd c(d), b(d);
            long long local_evaluated = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const std::size_t row = i * d;
                c = Eigen::Map<const Eigen::VectorXd>(frontier.centers.data() + row, d);
                b = Eigen::Map<const Eigen::VectorXd>(frontier.half_widths.data() + row, d);

                bool excluded = false;
                for (const auto& exclusion : exclusions) {
                    if (cell_inside_exclusion(c, b, exclusion)) {
                        excluded = true;
                        break;
                    }
                }
                if (excluded) {
                    status[i] = CellStatus::AssumedVerified;
                    lo[i] = -std::numeric_limits<double>::infinity();
                    hi[i] = std::numeric_limits<double>::infinity();
                    lmu[i] = std::numeric_limits<double>::infinity();
                    continue;
                }

                BoundEvaluation eval;
                try {
                    eval = evaluate_cell(problem, model, c, b, evaluator);
                } catch (const std::exception& e) {
                    throw std::runtime_error(std::string(e.what()) + " (cell center " +
                                             std::to_string(c[0]) + "...)");
                }
                ++local_evaluated;
                lo[i] = eval.lo;
                hi[i] = eval.hi;
                lmu[i] = eval.l_mu;

                const double eps1 = eval_target(problem.target_lower, c);
                const double eps2 = eval_target(problem.target_upper, c);
                if (eval.lo >= -eps1 && eval.hi <= eps2) {
                    status[i] = CellStatus::Satisfied;
                } else if (eval.hi < -eps1 || eval.lo > eps2) {
                    status[i] = CellStatus::Violated;
                } else if (b.norm() <= problem.min_cell_size ||
                           frontier.depth[i] >= problem.max_depth) {
                    status[i] = CellStatus::MinSizeReached;
                    if (frontier.depth[i] >= problem.max_depth &&
                        b.norm() > problem.min_cell_size) {
                        cap_hit.store(true, std::memory_order_relaxed);
                    }
                } else {
                    status[i] = kRefine;
                }
            }
            evaluated.fetch_add(local_evaluated, std::memory_order_relaxed);
        });

        // Sequential assembly: terminal cells into the report, the rest into
        // the next frontier, preserving index order.
        Frontier next;
        next.dim = d;
        std::size_t refine_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (status[i] == kRefine) ++refine_count;
        }
        const std::size_t children = refine_count << d;
        next.centers.reserve(children * d);
        next.half_widths.reserve(children * d);
        next.depth.reserve(children);

        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = i * d;
            if (status[i] != kRefine) {
                report.centers.insert(report.centers.end(), frontier.centers.begin() + row,
                                      frontier.centers.begin() + row + d);
                report.half_widths.insert(report.half_widths.end(),
                                          frontier.half_widths.begin() + row,
                                          frontier.half_widths.begin() + row + d);
                report.lo.push_back(lo[i]);
                report.hi.push_back(hi[i]);
                report.l_mu.push_back(lmu[i]);
                report.status.push_back(status[i]);
                report.depth.push_back(frontier.depth[i]);
                report.max_depth = std::max<int>(report.max_depth, frontier.depth[i]);
                continue;
            }
            const std::uint16_t child_depth = static_cast<std::uint16_t>(frontier.depth[i] + 1);
            for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
                for (int k = 0; k < d; ++k) {
                    const double hb = 0.5 * frontier.half_widths[row + k];
                    next.half_widths.push_back(hb);
                    next.centers.push_back(frontier.centers[row + k] +
                                           (((mask >> k) & 1U) ? hb : -hb));
                }
                next.depth.push_back(child_depth);
            }
        }
        frontier = std::move(next);
    }

    report.cells_evaluated = evaluated.load();
    report.depth_cap_hit = cap_hit.load();
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

EnvelopeResult lipschitz_envelope(const GpModel& model, const Hyperrectangle& domain,
                                  long long cell_budget, const EngineSettings& settings) {
    const int d = domain.dim();
    const int workers = resolve_workers(settings.workers);
    auto prune_table = detail::build_prune_table(model, settings.prune_rel);
    std::vector<LipschitzEvaluator> evaluators;
    evaluators.reserve(workers);
    for (int w = 0; w < workers; ++w) evaluators.emplace_back(model, prune_table);

    Frontier frontier;
    frontier.dim = d;
    frontier.centers.assign(domain.center.data(), domain.center.data() + d);
    frontier.half_widths.assign(domain.half_widths.data(), domain.half_widths.data() + d);
    frontier.depth.assign(1, 0);

    EnvelopeResult result;
    result.global = std::numeric_limits<double>::infinity();
    std::mutex max_mutex;

    for (;;) {
        const std::size_t n = frontier.size();
        double wave_max = 0.0;
        parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, int worker) {
            LipschitzEvaluator& evaluator = evaluators[worker];
            Eigen::VectorXd c(d), b(d);
            double local_max = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const std::size_t row = i * d;
                c = Eigen::Map<const Eigen::VectorXd>(frontier.centers.data() + row, d);
                b = Eigen::Map<const Eigen::VectorXd>(frontier.half_widths.data() + row, d);
                local_max = std::max(local_max, evaluator.evaluate(c, b));
            }
            std::lock_guard<std::mutex> lock(max_mutex);
            wave_max = std::max(wave_max, local_max);
        });
        result.curve.push_back(EnvelopePoint{static_cast<long long>(n), wave_max});
        result.global = wave_max;

        const long long next_count = static_cast<long long>(n) << d;
        if (next_count > cell_budget) break;

        Frontier next;
        next.dim = d;
        next.centers.reserve(static_cast<std::size_t>(next_count) * d);
        next.half_widths.reserve(static_cast<std::size_t>(next_count) * d);
        next.depth.assign(static_cast<std::size_t>(next_count),
                          static_cast<std::uint16_t>(frontier.depth[0] + 1));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = i * d;
            for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
                for (int k = 0; k < d; ++k) {
                    const double hb = 0.5 * frontier.half_widths[row + k];
                    next.half_widths.push_back(hb);
                    next.centers.push_back(frontier.centers[row + k] +
                                           (((mask >> k) & 1U) ? hb : -hb));
                }
            }
        }
        frontier = std::move(next);
    }
    return result;
}

namespace {

double certified_min_impl(const GpModel& model, const double* centers, const double* halfs,
                          const std::size_t* indices, std::size_t count, int d,
                          const EngineSettings& settings) {
    if (count == 0) {
        throw std::invalid_argument("certified_min: empty cell sequence");
    }
    const int workers = resolve_workers(settings.workers);
    auto prune_table = detail::build_prune_table(model, settings.prune_rel);

    // Bounding box of all cells: its Lipschitz constant dominates every
    // per-cell constant (bound monotonicity under inclusion).
    Eigen::VectorXd lower = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
    Eigen::VectorXd upper = -lower;
    for (std::size_t ii = 0; ii < count; ++ii) {
        const std::size_t row = indices[ii] * d;
        for (int k = 0; k < d; ++k) {
            lower[k] = std::min(lower[k], centers[row + k] - halfs[row + k]);
            upper[k] = std::max(upper[k], centers[row + k] + halfs[row + k]);
        }
    }
    LipschitzEvaluator cap_eval(model, prune_table);
    const Hyperrectangle bbox = Hyperrectangle::from_bounds(lower, upper);
    const double l_cap = cap_eval.evaluate(bbox);

    std::vector<double> mu(count), envelope(count), radius(count);
    parallel_chunks(count, workers, [&](std::size_t begin, std::size_t end, int) {
        Eigen::VectorXd c(d);
        for (std::size_t ii = begin; ii < end; ++ii) {
            const std::size_t row = indices[ii] * d;
            c = Eigen::Map<const Eigen::VectorXd>(centers + row, d);
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) r2 += halfs[row + k] * halfs[row + k];
            radius[ii] = std::sqrt(r2);
            mu[ii] = model.mean(c);
            envelope[ii] = mu[ii] - l_cap * radius[ii];
        }
    });

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return envelope[a] < envelope[b]; });

    // Monotonicity holds up to the pruning slack; keep a margin when cutting
    // off the exact pass.
    double max_radius = 0.0;
    for (std::size_t ii = 0; ii < count; ++ii) max_radius = std::max(max_radius, radius[ii]);
    const double margin = 2.0 * std::sqrt(static_cast<double>(d)) *
                          cap_eval.slack_cap() * max_radius;

    LipschitzEvaluator exact_eval(model, prune_table);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd c(d), b(d);
    for (std::size_t oi = 0; oi < count; ++oi) {
        const std::size_t ii = order[oi];
        if (envelope[ii] > best + margin) break;
        const std::size_t row = indices[ii] * d;
        c = Eigen::Map<const Eigen::VectorXd>(centers + row, d);
        b = Eigen::Map<const Eigen::VectorXd>(halfs + row, d);
        best = std::min(best, mu[ii] - exact_eval.evaluate(c, b) * radius[ii]);
    }
    return best;
}

}  // namespace

double certified_min(const GpModel& model, const VerificationReport& report,
                     const std::vector<std::size_t>& cell_indices,
                     const EngineSettings& settings) {
    return certified_min_impl(model, report.centers.data(), report.half_widths.data(),
                              cell_indices.data(), cell_indices.size(), report.dim, settings);
}

double certified_min(const GpModel& model, const std::vector<Hyperrectangle>& cells,
                     const EngineSettings& settings) {
    if (cells.empty()) {
        throw std::invalid_argument("certified_min: empty cell sequence");
    }
    const int d = cells.front().dim();
    std::vector<double> centers(cells.size() * d), halfs(cells.size() * d);
    std::vector<std::size_t> indices(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        indices[i] = i;
        for (int k = 0; k < d; ++k) {
            centers[i * d + k] = cells[i].center[k];
            halfs[i * d + k] = cells[i].half_widths[k];
        }
    }
    return certified_min_impl(model, centers.data(), halfs.data(), indices.data(),
                              cells.size(), d, settings);
}

}  // namespace gp3
