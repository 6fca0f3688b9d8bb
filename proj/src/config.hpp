#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "kernels.hpp"

namespace gp3 {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KernelConfig {
    KernelFamily family = KernelFamily::SquaredExponential;
    double sigma_f2 = 1.0;
    std::vector<double> lengthscales;
    double sigma_n2 = 0.0;
    bool optimize = false;
    int restarts = 4;
    unsigned seed = 1;
    bool fix_noise = true;
};

struct DomainConfig {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct ProblemConfig {
    std::string g = "mean";      // mean | table | sec51
    std::string f = "identity";  // identity | nearest_grid | flow_map
    double l_f = 1.0;
    double l_g = 0.0;
    double eps1_bar = std::numeric_limits<double>::infinity();
    double eps2_bar = std::numeric_limits<double>::infinity();
    double b_min = 1e-9;
    long long initial_cells = 1;
};

struct DynamicsConfig {
    std::string system = "smib";  // smib | linear (dx/dt = -x)
    double m1 = 1.0;
    double d1 = 20.0;
    double a12 = 10.0;
    double theta1 = 0.05002085680577375;  // arcsin(0.05)
    double dt = 0.01;
    int horizon = 1000;  // K
};

struct ExclusionConfig {
    bool is_ball = true;
    std::vector<double> center;  // ball
    double radius = 0.0;         // ball
    std::vector<double> lower;   // box
    std::vector<double> upper;   // box
};

struct DataConfig {
    std::string file;     // CSV path, or
    std::string builtin;  // "sec51" (analytic target) | "lyapunov" (from dynamics)
    long long samples = 0;
    double noise_sigma2 = 0.0;  // observation noise added to builtin targets
    unsigned seed = 0;
};

struct LipschitzSection {
    long long budget = 2000;
};

struct BaselineSection {
    bool enabled = true;
    long long grid = 4000;
    long long steps = 10000;
    double radius = 0.0;  // 0: use the first exclusion ball's radius
};

enum class Command { Lipschitz, Verify, Roa };

struct RunConfig {
    std::vector<KernelConfig> kernels;
    DomainConfig domain;
    ProblemConfig problem;
    DynamicsConfig dynamics;
    bool has_dynamics = false;
    std::vector<ExclusionConfig> exclusions;
    DataConfig data;
    bool has_data = false;
    LipschitzSection lipschitz;
    BaselineSection baseline;
    std::string output_dir = "gp3_out";
    int workers = 0;
};

nlohmann::json load_config_file(const std::string& path);

// Deep merge: override values replace base values; objects merge recursively.
nlohmann::json merge_overrides(nlohmann::json base, const nlohmann::json& overrides);

// Validates against the per-command schema; unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j, Command command);

// Round-trippable echo of the parsed configuration.
nlohmann::json echo_config(const RunConfig& config, Command command);

// Worker resolution: explicit config/flag value, else GP3_WORKERS, else 0
// (hardware concurrency downstream). The merged config already has flag
// overrides applied, so a nonzero value wins over the environment.
int effective_workers(const RunConfig& config);

}  // namespace gp3
