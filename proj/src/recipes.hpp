#pragma once

#include <filesystem>

#include "config.hpp"
#include "dynamics.hpp"
#include "io.hpp"
#include "verify.hpp"

namespace gp3 {

// Built-in benchmark target f(x) = 1 - sin(x1) + 1/(1 + exp(-x2)).
double sec51_target(const Eigen::VectorXd& x);

// Samples of the benchmark target on an equal-count uniform grid (endpoint
// inclusive); the realized sample count is the smallest per-axis power >=
// requested. Optional Gaussian observation noise with the given variance.
TrainingSet sec51_training_set(long long samples, const Hyperrectangle& domain,
                               double noise_sigma2 = 0.0, unsigned seed = 0);

// Table 1 hyperparameters for the benchmark: sigma_n2 = 0.1 for all families.
KernelConfig sec51_default_kernel(KernelFamily family);

struct LipschitzKernelRun {
    KernelConfig kernel;  // parameters actually used (after optional optimization)
    EnvelopeResult envelope;
    double naive_single_cell;  // wave-0 single-rectangle constant
    std::string curve_file;
};

struct LipschitzRecipeResult {
    std::vector<LipschitzKernelRun> runs;
    std::vector<std::string> output_files;
};

LipschitzRecipeResult run_lipschitz_recipe(const RunConfig& config,
                                           const std::filesystem::path& output_dir,
                                           int workers);

struct RoaRecipeResult {
    VerificationReport report;
    std::vector<std::size_t> w_cells;  // certified decrease region
    std::vector<std::size_t> v_cells;  // level-set cells, subset of w_cells
    double c_star;
    bool has_baseline = false;
    RoaBaseline baseline;
    KernelConfig kernel_used;
    std::vector<std::string> output_files;
    bool empty_w_warning = false;
};

RoaRecipeResult run_roa_recipe(const RunConfig& config, const std::filesystem::path& output_dir,
                               int workers);

// Shared helpers for config-driven runs.
GpModel fit_from_config(const KernelConfig& kernel, const TrainingSet& data);
Hyperrectangle domain_from_config(const DomainConfig& domain);
std::vector<Exclusion> exclusions_from_config(const std::vector<ExclusionConfig>& exclusions);
OdeSystem system_from_config(const DynamicsConfig& dynamics);

}  // namespace gp3
