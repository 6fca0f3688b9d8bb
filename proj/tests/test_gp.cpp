#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <numeric>
#include <random>

#include "gp.hpp"
#include "recipes.hpp"

using gp3::GpModel;
using gp3::KernelFamily;
using gp3::KernelSpec;
using gp3::TrainingSet;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

// Independent dense solve: Gaussian elimination with partial pivoting.
Eigen::VectorXd solve_oracle(Eigen::MatrixXd a, Eigen::VectorXd b) {
    const int n = static_cast<int>(a.rows());
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        for (int i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
        }
        a.row(k).swap(a.row(pivot));
        std::swap(b[k], b[pivot]);
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
            b[i] -= f * b[k];
        }
    }
    Eigen::VectorXd x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a(i, k) * x[k];
        x[i] = s / a(i, i);
    }
    return x;
}

// Independent log determinant via the same elimination.
double log_det_oracle(Eigen::MatrixXd a) {
    const int n = static_cast<int>(a.rows());
    double log_det = 0.0;
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        for (int i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
        }
        if (pivot != k) a.row(k).swap(a.row(pivot));  // PD case: pivots stay positive
        log_det += std::log(std::abs(a(k, k)));
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
        }
    }
    return log_det;
}

TrainingSet random_training(std::mt19937& rng, int n, int d, double spread = 3.0) {
    std::uniform_real_distribution<double> coord(-spread, spread);
    std::normal_distribution<double> target(0.0, 1.0);
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) x(i, k) = coord(rng);
        y[i] = target(rng);
    }
    return TrainingSet(std::move(x), std::move(y));
}

Eigen::MatrixXd covariance(const KernelSpec& spec, const Eigen::MatrixXd& inputs,
                           double noise) {
    const int n = static_cast<int>(inputs.rows());
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            k(i, j) = gp3::kernel_eval(spec, inputs.row(i).transpose(),
                                       inputs.row(j).transpose());
        }
    }
    k.diagonal().array() += noise;
    return k;
}

}  // namespace

TEST_CASE("fit: scalar cases pin the weight solve") {
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    const KernelSpec spec(KernelFamily::SquaredExponential, 1.0, vec({1.0}));

    const GpModel noise_free = gp3::fit(TrainingSet(x, vec({2.0})), spec, 0.0);
    CHECK(noise_free.weights()[0] == doctest::Approx(2.0).epsilon(1e-12));

    const GpModel noisy = gp3::fit(TrainingSet(x, vec({1.0})), spec, 0.1);
    CHECK(noisy.weights()[0] == doctest::Approx(1.0 / 1.1).epsilon(1e-12));
}

TEST_CASE("fit: weights match an independent dense solve") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5;
        const TrainingSet train = random_training(rng, n, 2);
        const KernelSpec spec(KernelFamily::SquaredExponential, 1.3, vec({0.9, 1.4}));
        const double noise = 0.05;
        const GpModel model = gp3::fit(train, spec, noise);
        const Eigen::VectorXd expected =
            solve_oracle(covariance(spec, train.inputs, noise), train.targets);
        CHECK((model.weights() - expected).norm() <= 1e-10 * expected.norm());
    }
}

TEST_CASE("fit: residual stays below 1e-8 norm(y) up to n=200") {
    std::mt19937 rng(32);
    for (const int n : {20, 80, 200}) {
        const TrainingSet train = random_training(rng, n, 2, 4.0);
        const KernelSpec spec(KernelFamily::Matern52, 1.0, vec({1.0, 1.0}));
        const double noise = 0.01;
        const GpModel model = gp3::fit(train, spec, noise);
        const Eigen::MatrixXd k = covariance(spec, train.inputs, noise);
        const double residual = (k * model.weights() - train.targets).norm();
        CHECK(residual <= 1e-8 * train.targets.norm());
    }
}

TEST_CASE("fit: singular noise-free systems take the jitter path") {
    Eigen::MatrixXd x(2, 1);
    x << 0.5, 0.5;  // duplicated input: K is exactly singular
    const KernelSpec spec(KernelFamily::SquaredExponential, 1.0, vec({1.0}));
    const GpModel model = gp3::fit(TrainingSet(x, vec({1.0, 1.0})), spec, 0.0);
    CHECK(model.jitter() > 0.0);
    CHECK(std::isfinite(model.weights().sum()));
}

TEST_CASE("mean: zero weights, interpolation, and decay") {
    std::mt19937 rng(33);
    const int n = 12;
    TrainingSet train = random_training(rng, n, 2);

    // Zero targets give zero weights and an identically zero mean.
    const KernelSpec spec(KernelFamily::SquaredExponential, 1.0, vec({1.0, 1.0}));
    TrainingSet zero = train;
    zero.targets.setZero();
    const GpModel zero_model = gp3::fit(zero, spec, 0.1);
    CHECK(zero_model.mean(vec({0.3, -0.7})) == 0.0);

    // Noise-free fit interpolates the targets.
    const GpModel interp = gp3::fit(train, spec, 0.0);
    for (int i = 0; i < n; ++i) {
        CHECK(interp.mean(train.inputs.row(i).transpose()) ==
              doctest::Approx(train.targets[i]).epsilon(1e-8));
    }

    // Far from all data the mean decays below 1e-10 sigma_f^2 ||lambda||_1.
    const double far_value = std::abs(interp.mean(vec({100.0, 100.0})));
    const double budget = 1e-10 * spec.signal_variance *
                          interp.weights().array().abs().sum();
    CHECK(far_value <= budget);
}

TEST_CASE("mean: linear in the targets and invariant to row permutation") {
    std::mt19937 rng(34);
    const int n = 15;
    const TrainingSet train_a = random_training(rng, n, 2);
    TrainingSet train_b = train_a;
    std::normal_distribution<double> target(0.0, 1.0);
    for (int i = 0; i < n; ++i) train_b.targets[i] = target(rng);

    TrainingSet train_sum = train_a;
    train_sum.targets += train_b.targets;

    const KernelSpec spec(KernelFamily::Matern32, 1.1, vec({1.2, 0.8}));
    const GpModel ma = gp3::fit(train_a, spec, 0.05);
    const GpModel mb = gp3::fit(train_b, spec, 0.05);
    const GpModel msum = gp3::fit(train_sum, spec, 0.05);

    // Permuted copy of train_a.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp(n, 2);
    Eigen::VectorXd yp(n);
    for (int i = 0; i < n; ++i) {
        xp.row(i) = train_a.inputs.row(perm[i]);
        yp[i] = train_a.targets[perm[i]];
    }
    const GpModel mp = gp3::fit(TrainingSet(xp, yp), spec, 0.05);

    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::VectorXd x = vec({coord(rng), coord(rng)});
        CHECK(msum.mean(x) == doctest::Approx(ma.mean(x) + mb.mean(x)).epsilon(1e-10));
        CHECK(mp.mean(x) == doctest::Approx(ma.mean(x)).epsilon(1e-10));
    }
}

TEST_CASE("log marginal likelihood: scalar cases and dense oracle") {
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    const KernelSpec unit(KernelFamily::SquaredExponential, 1.0, vec({1.0}));
    const GpModel zero_case = gp3::fit(TrainingSet(x, vec({0.0})), unit, 0.0);
    CHECK(zero_case.log_marginal_likelihood() ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));

    // Univariate Gaussian log density with total variance v.
    const double v = 1.0 + 0.3;  // sigma_f^2 + sigma_n^2
    const KernelSpec spec1(KernelFamily::SquaredExponential, 1.0, vec({1.0}));
    const double a = 0.8;
    const GpModel single = gp3::fit(TrainingSet(x, vec({a})), spec1, 0.3);
    CHECK(single.log_marginal_likelihood() ==
          doctest::Approx(-a * a / (2.0 * v) - 0.5 * std::log(v) -
                          0.5 * std::log(2.0 * M_PI))
              .epsilon(1e-12));

    std::mt19937 rng(35);
    for (int trial = 0; trial < 10; ++trial) {
        const TrainingSet train = random_training(rng, 4, 2);
        const KernelSpec spec(KernelFamily::SquaredExponential, 0.9, vec({1.1, 0.7}));
        const double noise = 0.2;
        const GpModel model = gp3::fit(train, spec, noise);
        const Eigen::MatrixXd k = covariance(spec, train.inputs, noise);
        const double expected = -0.5 * train.targets.dot(solve_oracle(k, train.targets)) -
                                0.5 * log_det_oracle(k) - 2.0 * std::log(2.0 * M_PI);
        CHECK(model.log_marginal_likelihood() == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("optimize: never worse than the initial point") {
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    const TrainingSet train(x, vec({0.5}));
    const KernelSpec init(KernelFamily::SquaredExponential, 1.0, vec({1.0}));
    const GpModel at_init = gp3::fit(train, init, 0.1);
    gp3::OptimizeOptions options;
    options.restarts = 1;
    options.max_iterations = 60;
    const auto result =
        gp3::optimize_hyperparameters(train, KernelFamily::SquaredExponential, init, 0.1,
                                      options);
    CHECK(result.log_marginal_likelihood >= at_init.log_marginal_likelihood() - 1e-12);
}

TEST_CASE("optimize: benchmark fit lands in the right basin") {
    // The sine direction recovers the published length scale within a factor
    // of two. The sigmoid direction is nearly linear over the domain, so
    // unconstrained likelihood maximization legitimately drives its length
    // scale beyond the published 5.537; assert the lower side and that our
    // optimum dominates the published parameter point in likelihood.
    const gp3::Hyperrectangle domain =
        gp3::Hyperrectangle::from_bounds(vec({-6.0, -4.0}), vec({4.0, 4.0}));
    const TrainingSet data = gp3::sec51_training_set(100, domain);
    const KernelSpec init(KernelFamily::SquaredExponential, 1.0, vec({1.0, 1.0}));
    gp3::OptimizeOptions options;
    options.fix_noise = true;
    options.restarts = 2;
    options.max_iterations = 250;
    const auto result = gp3::optimize_hyperparameters(
        data, KernelFamily::SquaredExponential, init, 0.1, options);
    const double l1 = result.spec.length_scales[0];
    const double l2 = result.spec.length_scales[1];
    CHECK(l1 >= 1.762 / 2.0);
    CHECK(l1 <= 1.762 * 2.0);
    CHECK(l2 >= 5.537 / 2.0);

    const KernelSpec published(KernelFamily::SquaredExponential, 0.956, vec({1.762, 5.537}));
    const GpModel at_published = gp3::fit(data, published, 0.1);
    CHECK(result.log_marginal_likelihood >= at_published.log_marginal_likelihood());
}

TEST_CASE("optimize: self-consistency on data drawn from a known kernel") {
    // Sample a GP with unit length scales and refit.
    std::mt19937 rng(36);
    const int n = 80;
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = coord(rng);
        x(i, 1) = coord(rng);
    }
    const KernelSpec truth(KernelFamily::SquaredExponential, 1.0, vec({1.0, 1.0}));
    Eigen::MatrixXd k = covariance(truth, x, 1e-8);
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(k).matrixL();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal(rng);
    const TrainingSet train(x, chol * z);

    const KernelSpec init(KernelFamily::SquaredExponential, 0.5, vec({0.4, 2.5}));
    gp3::OptimizeOptions options;
    options.fix_noise = true;
    options.restarts = 3;
    const auto result = gp3::optimize_hyperparameters(
        train, KernelFamily::SquaredExponential, init, 1e-6, options);
    for (int j = 0; j < 2; ++j) {
        CHECK(result.spec.length_scales[j] >= 1.0 / 1.5);
        CHECK(result.spec.length_scales[j] <= 1.5);
    }
}

TEST_CASE("invalid inputs are rejected") {
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    const KernelSpec spec(KernelFamily::SquaredExponential, 1.0, vec({1.0}));
    CHECK_THROWS_AS(gp3::fit(TrainingSet(x, vec({1.0})), spec, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(TrainingSet(x, vec({1.0, 2.0})), std::invalid_argument);
    const GpModel model = gp3::fit(TrainingSet(x, vec({1.0})), spec, 0.1);
    CHECK_THROWS_AS(model.mean(vec({0.0, 0.0})), std::invalid_argument);
}
