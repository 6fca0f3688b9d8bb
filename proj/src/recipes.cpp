#include "recipes.hpp"

#include <cmath>
#include <random>

#include "parallel.hpp"

namespace gp3 {

double sec51_target(const Eigen::VectorXd& x) {
    return 1.0 - std::sin(x[0]) + 1.0 / (1.0 + std::exp(-x[1]));
}

TrainingSet sec51_training_set(long long samples, const Hyperrectangle& domain,
                               double noise_sigma2, unsigned seed) {
    const int d = domain.dim();
    const long long side =
        std::max<long long>(1, static_cast<long long>(std::ceil(std::pow(
                                   static_cast<double>(samples), 1.0 / d) - 1e-9)));
    long long total = 1;
    for (int k = 0; k < d; ++k) total *= side;
    Eigen::MatrixXd inputs(total, d);
    Eigen::VectorXd targets(total);
    const Eigen::VectorXd lower = domain.lower();
    const Eigen::VectorXd upper = domain.upper();
    std::vector<long long> index(d, 0);
    for (long long p = 0; p < total; ++p) {
        for (int k = 0; k < d; ++k) {
            inputs(p, k) = side == 1 ? domain.center[k]
                                     : lower[k] + (upper[k] - lower[k]) * index[k] / (side - 1);
        }
        targets[p] = sec51_target(inputs.row(p).transpose());
        for (int k = 0; k < d; ++k) {
            if (++index[k] < side) break;
            index[k] = 0;
        }
    }
    if (noise_sigma2 > 0.0) {
        std::mt19937 rng(seed);
        std::normal_distribution<double> noise(0.0, std::sqrt(noise_sigma2));
        for (long long p = 0; p < total; ++p) targets[p] += noise(rng);
    }
    return TrainingSet(std::move(inputs), std::move(targets));
}

KernelConfig sec51_default_kernel(KernelFamily family) {
    KernelConfig k;
    k.family = family;
    k.sigma_n2 = 0.1;
    switch (family) {
        case KernelFamily::SquaredExponential:
            k.sigma_f2 = 0.956;
            k.lengthscales = {1.762, 5.537};
            break;
        case KernelFamily::Matern32:
            k.sigma_f2 = 1.274;
            k.lengthscales = {3.755, 15.052};
            break;
        case KernelFamily::Matern52:
            k.sigma_f2 = 1.012;
            k.lengthscales = {2.333, 8.496};
            break;
    }
    return k;
}

GpModel fit_from_config(const KernelConfig& kernel, const TrainingSet& data) {
    Eigen::VectorXd scales =
        Eigen::Map<const Eigen::VectorXd>(kernel.lengthscales.data(), kernel.lengthscales.size());
    KernelSpec spec(kernel.family, kernel.sigma_f2, scales);
    if (kernel.optimize) {
        OptimizeOptions options;
        options.restarts = kernel.restarts;
        options.seed = kernel.seed;
        options.fix_noise = kernel.fix_noise;
        const auto best =
            optimize_hyperparameters(data, kernel.family, spec, kernel.sigma_n2, options);
        return fit(data, best.spec, best.noise_variance);
    }
    return fit(data, spec, kernel.sigma_n2);
}

Hyperrectangle domain_from_config(const DomainConfig& domain) {
    return Hyperrectangle::from_bounds(
        Eigen::Map<const Eigen::VectorXd>(domain.lower.data(), domain.lower.size()),
        Eigen::Map<const Eigen::VectorXd>(domain.upper.data(), domain.upper.size()));
}

std::vector<Exclusion> exclusions_from_config(const std::vector<ExclusionConfig>& exclusions) {
    std::vector<Exclusion> out;
    for (const auto& e : exclusions) {
        if (e.is_ball) {
            out.push_back(ExclusionBall{
                Eigen::Map<const Eigen::VectorXd>(e.center.data(), e.center.size()), e.radius});
        } else {
            out.push_back(ExclusionBox{Hyperrectangle::from_bounds(
                Eigen::Map<const Eigen::VectorXd>(e.lower.data(), e.lower.size()),
                Eigen::Map<const Eigen::VectorXd>(e.upper.data(), e.upper.size()))});
        }
    }
    return out;
}

OdeSystem system_from_config(const DynamicsConfig& dynamics) {
    if (dynamics.system == "linear") {
        OdeSystem system;
        system.dimension = 2;
        system.name = "linear";
        system.field = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& dxdt) {
            dxdt = -x;
        };
        return system;
    }
    SmibParams params;
    params.m1 = dynamics.m1;
    params.d1 = dynamics.d1;
    params.a12 = dynamics.a12;
    params.theta1 = dynamics.theta1;
    return smib_system(params);
}

namespace {

TrainingSet lipschitz_data(const RunConfig& config, const Hyperrectangle& domain) {
    if (!config.data.file.empty()) {
        return read_training_csv(config.data.file);
    }
    if (config.data.builtin == "sec51") {
        return sec51_training_set(config.data.samples, domain, config.data.noise_sigma2,
                                  config.data.seed);
    }
    throw ConfigError("lipschitz command supports data.builtin = 'sec51' or a data file");
}

}  // namespace

LipschitzRecipeResult run_lipschitz_recipe(const RunConfig& config,
                                           const std::filesystem::path& output_dir,
                                           int workers) {
    const Hyperrectangle domain = domain_from_config(config.domain);
    const TrainingSet data = lipschitz_data(config, domain);
    if (data.dim() != domain.dim()) {
        throw ConfigError("training data dimension does not match domain");
    }

    std::filesystem::create_directories(output_dir);
    EngineSettings settings;
    settings.workers = workers;

    LipschitzRecipeResult result;
    for (const auto& kernel : config.kernels) {
        const GpModel model = fit_from_config(kernel, data);
        LipschitzKernelRun run;
        run.kernel = kernel;
        run.kernel.sigma_f2 = model.spec().signal_variance;
        run.kernel.lengthscales.assign(
            model.spec().length_scales.data(),
            model.spec().length_scales.data() + model.spec().length_scales.size());
        run.kernel.sigma_n2 = model.noise_variance();
        run.envelope = lipschitz_envelope(model, domain, config.lipschitz.budget, settings);
        run.naive_single_cell = run.envelope.curve.front().lipschitz;

        const std::string filename =
            std::string("lipschitz_") + kernel_family_name(kernel.family) + ".csv";
        const auto path = output_dir / filename;
        write_curve_csv(path, run.envelope.curve);
        run.curve_file = path.string();
        result.output_files.push_back(path.string());
        result.runs.push_back(std::move(run));
    }
    return result;
}

RoaRecipeResult run_roa_recipe(const RunConfig& config, const std::filesystem::path& output_dir,
                               int workers) {
    if (config.domain.lower.size() != 2) {
        throw ConfigError("roa command requires a 2-dimensional domain");
    }
    const Hyperrectangle domain = domain_from_config(config.domain);
    const OdeSystem system = system_from_config(config.dynamics);
    const IntegratorConfig integ;

    TrainingSet data;
    if (!config.data.file.empty()) {
        data = read_training_csv(config.data.file);
    } else {
        const long long n = config.has_data ? config.data.samples : 1024;
        const auto dataset = build_lyapunov_dataset(system, domain, n, config.dynamics.horizon,
                                                    config.dynamics.dt, integ, workers);
        data = TrainingSet(dataset.initial_states, dataset.values);
    }
    if (data.dim() != 2) {
        throw ConfigError("roa training data must be 2-dimensional");
    }

    const GpModel model = fit_from_config(config.kernels.front(), data);

    ProblemSpec problem;
    problem.g_is_mean = true;
    problem.f_is_identity = false;
    problem.f = flow_map(system, config.dynamics.dt, integ);
    problem.lipschitz_f = config.problem.l_f;
    problem.target_lower = {};  // +inf
    problem.target_upper = [](const Eigen::VectorXd&) { return 0.0; };
    problem.min_cell_size = config.problem.b_min;
    problem.domain = domain;
    problem.initial_cells = config.problem.initial_cells;

    const std::vector<Exclusion> exclusions = exclusions_from_config(config.exclusions);
    EngineSettings settings;
    settings.workers = workers;

    RoaRecipeResult result;
    result.kernel_used = config.kernels.front();
    result.kernel_used.sigma_f2 = model.spec().signal_variance;
    result.kernel_used.lengthscales.assign(
        model.spec().length_scales.data(),
        model.spec().length_scales.data() + model.spec().length_scales.size());
    result.kernel_used.sigma_n2 = model.noise_variance();

    result.report = run_analysis(problem, model, exclusions, settings);
    const auto& report = result.report;

    std::vector<std::size_t> non_verified;
    for (std::size_t i = 0; i < report.size(); ++i) {
        switch (report.status[i]) {
            case CellStatus::Satisfied: result.w_cells.push_back(i); break;
            case CellStatus::MinSizeReached:
            case CellStatus::Violated: non_verified.push_back(i); break;
            case CellStatus::AssumedVerified: break;
        }
    }
    result.empty_w_warning = result.w_cells.empty();

    result.c_star = non_verified.empty()
                        ? std::numeric_limits<double>::infinity()
                        : certified_min(model, report, non_verified, settings);

    // Level set: verified cells whose certified mean upper bound stays below
    // the threshold.
    if (!result.w_cells.empty() && std::isfinite(result.c_star)) {
        const std::size_t nw = result.w_cells.size();
        std::vector<std::uint8_t> in_level(nw, 0);
        const int d = report.dim;
        parallel_chunks(nw, workers, [&](std::size_t begin, std::size_t end, int) {
            Eigen::VectorXd c(d);
            for (std::size_t ii = begin; ii < end; ++ii) {
                const std::size_t cell = result.w_cells[ii];
                c = report.center(cell);
                double r2 = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double b = report.half_widths[cell * d + k];
                    r2 += b * b;
                }
                const double upper = model.mean(c) + report.l_mu[cell] * std::sqrt(r2);
                in_level[ii] = upper <= result.c_star ? 1 : 0;
            }
        });
        for (std::size_t ii = 0; ii < nw; ++ii) {
            if (in_level[ii]) result.v_cells.push_back(result.w_cells[ii]);
        }
    } else if (!result.w_cells.empty()) {
        result.v_cells = result.w_cells;  // c* = +inf: every verified cell qualifies
    }

    std::filesystem::create_directories(output_dir);
    const auto w_path = output_dir / "w_cells.csv";
    const auto v_path = output_dir / "v_cells.csv";
    write_cells_csv(w_path, report, result.w_cells);
    write_cells_csv(v_path, report, result.v_cells);
    result.output_files.push_back(w_path.string());
    result.output_files.push_back(v_path.string());

    if (config.baseline.enabled) {
        double radius = config.baseline.radius;
        if (radius <= 0.0) {
            for (const auto& e : config.exclusions) {
                if (e.is_ball) {
                    radius = e.radius;
                    break;
                }
            }
        }
        if (radius <= 0.0) {
            throw ConfigError("baseline.radius must be set when no ball exclusion exists");
        }
        result.baseline = roa_baseline(system, domain, config.baseline.grid,
                                       config.baseline.steps, config.dynamics.dt, radius, integ,
                                       workers);
        result.has_baseline = true;
        const auto b_path = output_dir / "baseline.csv";
        write_baseline_csv(b_path, result.baseline);
        result.output_files.push_back(b_path.string());
    }
    return result;
}

}  // namespace gp3
