#include "gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

namespace gp3 {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const Eigen::MatrixXd& inputs) {
    const int n = static_cast<int>(inputs.rows());
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        k(i, i) = spec.signal_variance;
        for (int j = 0; j < i; ++j) {
            const double v = kernel_eval(spec, inputs.row(i).transpose(), inputs.row(j).transpose());
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

// Locates the first non-positive pivot of a failed factorization; only runs
// on the error path.
int find_failing_pivot(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXd a = m;
    for (int k = 0; k < n; ++k) {
        if (!(a(k, k) > 0.0)) return k;
        const double root = std::sqrt(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            a(i, k) /= root;
        }
        for (int jj = k + 1; jj < n; ++jj) {
            for (int i = jj; i < n; ++i) {
                a(i, jj) -= a(i, k) * a(jj, k);
            }
        }
    }
    return n - 1;
}

}  // namespace

TrainingSet::TrainingSet(Eigen::MatrixXd inputs_, Eigen::VectorXd targets_)
    : inputs(std::move(inputs_)), targets(std::move(targets_)) {
    if (inputs.rows() < 1) {
        throw std::invalid_argument("TrainingSet: need at least one point");
    }
    if (inputs.rows() != targets.size()) {
        throw std::invalid_argument("TrainingSet: row count does not match target count");
    }
    if (!inputs.allFinite() || !targets.allFinite()) {
        throw std::invalid_argument("TrainingSet: non-finite entries");
    }
}

NotPositiveDefinite::NotPositiveDefinite(int pivot_)
    : std::runtime_error("covariance matrix not positive definite at pivot " +
                         std::to_string(pivot_)),
      pivot(pivot_) {}

GpModel::GpModel(KernelSpec spec, double noise_variance, TrainingSet train,
                 Eigen::VectorXd weights, Eigen::MatrixXd chol_lower, double jitter)
    : spec_(std::move(spec)),
      noise_variance_(noise_variance),
      train_(std::move(train)),
      weights_(std::move(weights)),
      chol_lower_(std::move(chol_lower)),
      jitter_(jitter) {
    scaled_inputs_ = train_.inputs.array().rowwise() /
                     spec_.length_scales.transpose().array();
    scaled_sq_norms_ = scaled_inputs_.rowwise().squaredNorm();
}

double GpModel::mean(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) {
        throw std::invalid_argument("mean: dimension mismatch");
    }
    const Eigen::VectorXd xs = x.array() / spec_.length_scales.array();
    Eigen::ArrayXd r2 = (scaled_sq_norms_.array() - 2.0 * (scaled_inputs_ * xs).array() +
                         xs.squaredNorm()).max(0.0);
    Eigen::ArrayXd values;
    switch (spec_.family) {
        case KernelFamily::SquaredExponential:
            values = (-0.5 * r2).exp();
            break;
        case KernelFamily::Matern32: {
            const Eigen::ArrayXd r = r2.sqrt();
            values = (1.0 + 1.7320508075688772 * r) * (-1.7320508075688772 * r).exp();
            break;
        }
        case KernelFamily::Matern52: {
            const Eigen::ArrayXd r = r2.sqrt();
            values = (1.0 + 2.23606797749979 * r + (5.0 / 3.0) * r2) *
                     (-2.23606797749979 * r).exp();
            break;
        }
    }
    return spec_.signal_variance * (values * weights_.array()).sum();
}

double GpModel::log_marginal_likelihood() const {
    const double fit_term = -0.5 * train_.targets.dot(weights_);
    const double logdet_half = chol_lower_.diagonal().array().log().sum();
    return fit_term - logdet_half - 0.5 * size() * kLog2Pi;
}

GpModel fit(const TrainingSet& train, const KernelSpec& spec, double noise_variance) {
    if (train.dim() != spec.dim()) {
        throw std::invalid_argument("fit: training dimension does not match kernel");
    }
    if (noise_variance < 0.0 || !std::isfinite(noise_variance)) {
        throw std::invalid_argument("fit: noise variance must be >= 0");
    }
    const int n = train.size();
    Eigen::MatrixXd k = covariance_matrix(spec, train.inputs);
    k.diagonal().array() += noise_variance;

    double jitter = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
        if (noise_variance == 0.0) {
            jitter = 1e-10 * spec.signal_variance;
            k.diagonal().array() += jitter;
            llt.compute(k);
        }
        if (llt.info() != Eigen::Success) {
            throw NotPositiveDefinite(find_failing_pivot(k));
        }
    }
    Eigen::VectorXd lambda = llt.solve(train.targets);
    Eigen::MatrixXd lower = llt.matrixL();
    (void)n;
    return GpModel(spec, noise_variance, train, std::move(lambda), std::move(lower), jitter);
}

namespace {

struct ParamSpace {
    KernelFamily family;
    int dim;
    bool fix_noise;
    double fixed_noise;

    int size() const { return 1 + dim + (fix_noise ? 0 : 1); }

    Eigen::VectorXd pack(const KernelSpec& spec, double noise) const {
        Eigen::VectorXd theta(size());
        theta[0] = std::log(spec.signal_variance);
        theta.segment(1, dim) = spec.length_scales.array().log();
        if (!fix_noise) theta[1 + dim] = std::log(std::max(noise, 1e-12));
        return theta;
    }

    std::pair<KernelSpec, double> unpack(const Eigen::VectorXd& theta) const {
        KernelSpec spec(family, std::exp(theta[0]), theta.segment(1, dim).array().exp());
        const double noise = fix_noise ? fixed_noise : std::exp(theta[1 + dim]);
        return {spec, noise};
    }
};

double negative_lml(const ParamSpace& space, const TrainingSet& train,
                    const Eigen::VectorXd& theta) {
    if (!theta.allFinite() || theta.array().abs().maxCoeff() > 30.0) {
        return std::numeric_limits<double>::infinity();
    }
    try {
        auto [spec, noise] = space.unpack(theta);
        return -fit(train, spec, noise).log_marginal_likelihood();
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
}

// Nelder-Mead with standard coefficients; terminates on simplex spread.
Eigen::VectorXd nelder_mead(const ParamSpace& space, const TrainingSet& train,
                            const Eigen::VectorXd& start, int max_iterations) {
    const int n = static_cast<int>(start.size());
    std::vector<Eigen::VectorXd> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    for (int i = 0; i < n; ++i) {
        pts[i + 1][i] += 0.3;
    }
    for (int i = 0; i <= n; ++i) {
        vals[i] = negative_lml(space, train, pts[i]);
    }

    auto order = [&] {
        for (int i = 1; i <= n; ++i) {
            Eigen::VectorXd p = pts[i];
            double v = vals[i];
            int k = i - 1;
            while (k >= 0 && vals[k] > v) {
                pts[k + 1] = pts[k];
                vals[k + 1] = vals[k];
                --k;
            }
            pts[k + 1] = std::move(p);
            vals[k + 1] = v;
        }
    };
    order();

    for (int iter = 0; iter < max_iterations; ++iter) {
        if (std::abs(vals[n] - vals[0]) < 1e-10 * (1.0 + std::abs(vals[0]))) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[i];
        centroid /= n;

        const Eigen::VectorXd reflected = centroid + (centroid - pts[n]);
        const double fr = negative_lml(space, train, reflected);
        if (fr < vals[0]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[n]);
            const double fe = negative_lml(space, train, expanded);
            if (fe < fr) {
                pts[n] = expanded;
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = reflected;
            vals[n] = fr;
        } else {
            const Eigen::VectorXd contracted = centroid + 0.5 * (pts[n] - centroid);
            const double fc = negative_lml(space, train, contracted);
            if (fc < vals[n]) {
                pts[n] = contracted;
                vals[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = negative_lml(space, train, pts[i]);
                }
            }
        }
        order();
    }
    return pts[0];
}

}  // namespace

OptimizeResult optimize_hyperparameters(const TrainingSet& train, KernelFamily family,
                                        const KernelSpec& init, double init_noise_variance,
                                        const OptimizeOptions& options) {
    if (init.dim() != train.dim()) {
        throw std::invalid_argument("optimize_hyperparameters: dimension mismatch");
    }
    const ParamSpace space{family, train.dim(), options.fix_noise, init_noise_variance};
    const Eigen::VectorXd theta0 = space.pack(init, init_noise_variance);
    if (!std::isfinite(negative_lml(space, train, theta0))) {
        throw std::invalid_argument("optimize_hyperparameters: non-finite likelihood at init");
    }

    std::mt19937 rng(options.seed);
    std::normal_distribution<double> noise(0.0, 0.7);

    Eigen::VectorXd best = theta0;
    double best_val = negative_lml(space, train, theta0);
    for (int restart = 0; restart <= options.restarts; ++restart) {
        Eigen::VectorXd start = theta0;
        if (restart > 0) {
            for (int i = 0; i < start.size(); ++i) start[i] += noise(rng);
        }
        const Eigen::VectorXd found = nelder_mead(space, train, start, options.max_iterations);
        const double val = negative_lml(space, train, found);
        if (val < best_val) {
            best = found;
            best_val = val;
        }
    }
    auto [spec, noise_var] = space.unpack(best);
    return OptimizeResult{spec, noise_var, -best_val};
}

}  // namespace gp3
