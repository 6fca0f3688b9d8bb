#pragma once

#include <Eigen/Core>
#include <optional>

#include "kernels.hpp"

namespace gp3 {

struct TrainingSet {
    Eigen::MatrixXd inputs;   // N x d, one row per point
    Eigen::VectorXd targets;  // N

    TrainingSet() = default;
    TrainingSet(Eigen::MatrixXd inputs_, Eigen::VectorXd targets_);

    int size() const { return static_cast<int>(inputs.rows()); }
    int dim() const { return static_cast<int>(inputs.cols()); }
};

struct NotPositiveDefinite : std::runtime_error {
    int pivot;
    explicit NotPositiveDefinite(int pivot_);
};

// Posterior mean model: weights solve (K + sigma_n^2 I) lambda = y through a
// cached Cholesky factor. Immutable after fit; safe to share across threads.
class GpModel {
  public:
    GpModel(KernelSpec spec, double noise_variance, TrainingSet train, Eigen::VectorXd weights,
            Eigen::MatrixXd chol_lower, double jitter);

    const KernelSpec& spec() const { return spec_; }
    double noise_variance() const { return noise_variance_; }
    const TrainingSet& train() const { return train_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }
    double jitter() const { return jitter_; }

    int size() const { return train_.size(); }
    int dim() const { return train_.dim(); }

    // Training inputs with each column divided by its length scale, plus
    // cached squared row norms; shared by the mean and bound evaluators.
    const Eigen::MatrixXd& scaled_inputs() const { return scaled_inputs_; }
    const Eigen::VectorXd& scaled_sq_norms() const { return scaled_sq_norms_; }

    double mean(const Eigen::VectorXd& x) const;

    double log_marginal_likelihood() const;

  private:
    KernelSpec spec_;
    double noise_variance_;
    TrainingSet train_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd chol_lower_;
    double jitter_;
    Eigen::MatrixXd scaled_inputs_;
    Eigen::VectorXd scaled_sq_norms_;
};

// Fits lambda = (K + sigma_n^2 I)^{-1} y via LLT. If sigma_n^2 = 0 and the
// factorization fails, retries once with jitter 1e-10 * sigma_f^2; the jitter
// used is recorded on the model.
GpModel fit(const TrainingSet& train, const KernelSpec& spec, double noise_variance);

struct OptimizeOptions {
    int restarts = 4;
    unsigned seed = 1;
    bool fix_noise = false;   // keep sigma_n^2 at its initial value
    int max_iterations = 400;
};

struct OptimizeResult {
    KernelSpec spec;
    double noise_variance;
    double log_marginal_likelihood;
};

// Derivative-free simplex search over log-parameters, with random restarts.
// Guarantees a log marginal likelihood no worse than the initial point.
OptimizeResult optimize_hyperparameters(const TrainingSet& train, KernelFamily family,
                                        const KernelSpec& init, double init_noise_variance,
                                        const OptimizeOptions& options = {});

}  // namespace gp3
