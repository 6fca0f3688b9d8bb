#include "driver.hpp"

#include <cstdio>
#include <fstream>

#include "parallel.hpp"
#include "recipes.hpp"

namespace gp3 {

namespace {

using nlohmann::json;

struct MergedConfig {
    json merged;
    std::string kernel_filter;
};

MergedConfig merge_config(const std::string& config_path, const std::string& overrides_json) {
    json base = load_config_file(config_path);
    MergedConfig out;
    if (!overrides_json.empty()) {
        json overrides;
        try {
            overrides = json::parse(overrides_json);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("invalid overrides JSON: ") + e.what());
        }
        if (overrides.contains("kernel_filter")) {
            out.kernel_filter = overrides["kernel_filter"].get<std::string>();
            overrides.erase("kernel_filter");
        }
        base = merge_overrides(std::move(base), overrides);
    }
    out.merged = std::move(base);
    return out;
}

void apply_kernel_filter(RunConfig& config, const std::string& filter) {
    if (filter.empty()) return;
    const KernelFamily family = kernel_family_from_name(filter);
    std::vector<KernelConfig> kept;
    for (const auto& k : config.kernels) {
        if (k.family == family) kept.push_back(k);
    }
    if (kept.empty()) {
        throw ConfigError("kernel filter '" + filter + "' matches no configured kernel");
    }
    config.kernels = std::move(kept);
}

RunManifest start_manifest(const char* command, const RunConfig& config, Command kind,
                           int workers) {
    RunManifest manifest;
    manifest.command = command;
    manifest.config_echo_json = echo_config(config, kind).dump();
    manifest.started_utc = utc_timestamp_now();
    manifest.workers = resolve_workers(workers);
    return manifest;
}

void finish_manifest(RunManifest manifest, const std::vector<std::string>& outputs,
                     const std::filesystem::path& output_dir) {
    manifest.outputs = outputs;
    manifest.finished_utc = utc_timestamp_now();
    write_manifest(output_dir / "manifest.json", manifest);
}

}  // namespace

void drive_lipschitz(const std::string& config_path, const std::string& overrides_json) {
    auto merged = merge_config(config_path, overrides_json);
    RunConfig config = parse_config(merged.merged, Command::Lipschitz);
    apply_kernel_filter(config, merged.kernel_filter);
    const int workers = effective_workers(config);

    RunManifest manifest = start_manifest("lipschitz", config, Command::Lipschitz, workers);
    const std::filesystem::path out_dir = config.output_dir;
    const auto result = run_lipschitz_recipe(config, out_dir, workers);

    json summary;
    summary["kernels"] = json::array();
    for (const auto& run : result.runs) {
        json k;
        k["family"] = kernel_family_name(run.kernel.family);
        k["naive_single_cell_L"] = run.naive_single_cell;
        k["final_L"] = run.envelope.global;
        k["final_cells"] = run.envelope.curve.back().cells;
        k["curve_file"] = run.curve_file;
        summary["kernels"].push_back(std::move(k));
    }
    const auto summary_path = out_dir / "summary.json";
    std::ofstream out(summary_path);
    if (!out) throw IoError("cannot write " + summary_path.string());
    out << summary.dump(1, '\t') << '\n';

    auto outputs = result.output_files;
    outputs.push_back(summary_path.string());
    finish_manifest(std::move(manifest), outputs, out_dir);
}

namespace {

TrainingSet verify_data(const RunConfig& config, const Hyperrectangle& domain) {
    if (!config.data.file.empty()) return read_training_csv(config.data.file);
    if (config.data.builtin == "sec51") {
        return sec51_training_set(config.data.samples, domain, config.data.noise_sigma2,
                                  config.data.seed);
    }
    throw ConfigError("verify command supports data.builtin = 'sec51' or a data file");
}

}  // namespace

void drive_verify(const std::string& config_path, const std::string& overrides_json) {
    auto merged = merge_config(config_path, overrides_json);
    RunConfig config = parse_config(merged.merged, Command::Verify);
    const int workers = effective_workers(config);

    const Hyperrectangle domain = domain_from_config(config.domain);
    const TrainingSet data = verify_data(config, domain);
    if (data.dim() != domain.dim()) {
        throw ConfigError("training data dimension does not match domain");
    }
    RunManifest manifest = start_manifest("verify", config, Command::Verify, workers);

    const GpModel model = fit_from_config(config.kernels.front(), data);

    ProblemSpec problem;
    problem.domain = domain;
    problem.min_cell_size = config.problem.b_min;
    problem.initial_cells = config.problem.initial_cells;
    const double eps1 = config.problem.eps1_bar;
    const double eps2 = config.problem.eps2_bar;
    problem.target_lower = [eps1](const Eigen::VectorXd&) { return eps1; };
    problem.target_upper = [eps2](const Eigen::VectorXd&) { return eps2; };

    OdeSystem system;
    IntegratorConfig integ;
    if (config.problem.f == "identity") {
        problem.f_is_identity = true;
        problem.lipschitz_f = config.problem.l_f;
    } else if (config.problem.f == "nearest_grid") {
        problem.f_is_identity = false;
        problem.lipschitz_f = config.problem.l_f;
        const Eigen::MatrixXd grid = data.inputs;
        problem.f = [grid](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::Index best;
            (grid.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&best);
            return grid.row(best).transpose();
        };
    } else {  // flow_map
        if (domain.dim() != 2) {
            throw ConfigError("problem.f = flow_map requires a 2-dimensional domain");
        }
        system = system_from_config(config.dynamics);
        problem.f_is_identity = false;
        problem.f = flow_map(system, config.dynamics.dt, integ);
        problem.lipschitz_f = config.problem.l_f;
    }

    if (config.problem.g == "mean") {
        problem.g_is_mean = true;
    } else if (config.problem.g == "sec51") {
        problem.g_is_mean = false;
        problem.g = sec51_target;
        problem.lipschitz_g = config.problem.l_g;
    } else {  // table: value of the nearest training point
        problem.g_is_mean = false;
        const Eigen::MatrixXd grid = data.inputs;
        const Eigen::VectorXd values = data.targets;
        problem.g = [grid, values](const Eigen::VectorXd& x) {
            Eigen::Index best;
            (grid.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&best);
            return values[best];
        };
        problem.lipschitz_g = config.problem.l_g;
    }

    EngineSettings settings;
    settings.workers = workers;
    const auto report =
        run_analysis(problem, model, exclusions_from_config(config.exclusions), settings);

    const std::filesystem::path out_dir = config.output_dir;
    std::filesystem::create_directories(out_dir);
    const auto csv_path = out_dir / "cells.csv";
    const auto json_path = out_dir / "report.json";
    write_cells_csv(csv_path, report, {}, true);
    write_report_json(json_path, report);

    long long satisfied = 0, min_size = 0, violated = 0, assumed = 0;
    for (const auto s : report.status) {
        switch (s) {
            case CellStatus::Satisfied: ++satisfied; break;
            case CellStatus::MinSizeReached: ++min_size; break;
            case CellStatus::Violated: ++violated; break;
            case CellStatus::AssumedVerified: ++assumed; break;
        }
    }
    std::printf("cells=%zu satisfied=%lld min_size=%lld violated=%lld assumed=%lld\n",
                report.size(), satisfied, min_size, violated, assumed);
    if (min_size > 0 || violated > 0) {
        std::printf("note: %lld cells unverifiable at b_min, %lld violated\n", min_size,
                    violated);
    }

    finish_manifest(std::move(manifest), {csv_path.string(), json_path.string()}, out_dir);
}

void drive_roa(const std::string& config_path, const std::string& overrides_json) {
    auto merged = merge_config(config_path, overrides_json);
    RunConfig config = parse_config(merged.merged, Command::Roa);
    const int workers = effective_workers(config);

    RunManifest manifest = start_manifest("roa", config, Command::Roa, workers);
    const std::filesystem::path out_dir = config.output_dir;
    const auto result = run_roa_recipe(config, out_dir, workers);

    json summary;
    summary["c_star"] = std::isfinite(result.c_star) ? json(result.c_star) : json("inf");
    summary["w_cells"] = result.w_cells.size();
    summary["v_cells"] = result.v_cells.size();
    summary["total_cells"] = result.report.size();
    summary["cells_evaluated"] = result.report.cells_evaluated;
    summary["max_depth"] = result.report.max_depth;
    summary["wall_time_seconds"] = result.report.wall_time_seconds;
    summary["empty_w_warning"] = result.empty_w_warning;
    const auto summary_path = out_dir / "summary.json";
    std::ofstream out(summary_path);
    if (!out) throw IoError("cannot write " + summary_path.string());
    out << summary.dump(1, '\t') << '\n';

    auto outputs = result.output_files;
    outputs.push_back(summary_path.string());
    finish_manifest(std::move(manifest), outputs, out_dir);
}

std::string simulate_csv(const std::string& system_id, const double* x0, int dim,
                         long long steps, double dt, const std::string& params_json) {
    if (steps < 0 || !(dt > 0.0)) {
        throw std::invalid_argument("simulate: need steps >= 0 and dt > 0");
    }
    OdeSystem system;
    if (system_id == "smib") {
        SmibParams params;
        if (!params_json.empty()) {
            json p = json::parse(params_json);
            params.m1 = p.value("m1", params.m1);
            params.d1 = p.value("d1", params.d1);
            params.a12 = p.value("a12", params.a12);
            params.theta1 = p.value("theta1", params.theta1);
        }
        system = smib_system(params);
        if (dim != 2) throw std::invalid_argument("smib expects a 2-dimensional state");
    } else if (system_id == "linear") {
        system.dimension = dim;
        system.name = "linear";
        system.field = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& dxdt) {
            dxdt = -x;
        };
    } else {
        throw ConfigError("unknown system id: " + system_id);
    }

    const Eigen::Map<const Eigen::VectorXd> state0(x0, dim);
    std::vector<double> times;
    times.reserve(steps);
    for (long long k = 1; k <= steps; ++k) times.push_back(k * dt);
    IntegratorConfig config;
    const auto states = integrate(system, state0, times, config);

    std::string csv = "t";
    for (int k = 0; k < dim; ++k) csv += ",x" + std::to_string(k + 1);
    csv += '\n';
    char buf[32];
    auto append_row = [&](double t, const Eigen::VectorXd& x) {
        std::snprintf(buf, sizeof buf, "%.17g", t);
        csv += buf;
        for (int k = 0; k < dim; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", x[k]);
            csv += ',';
            csv += buf;
        }
        csv += '\n';
    };
    append_row(0.0, state0);
    for (long long k = 0; k < static_cast<long long>(states.size()); ++k) {
        append_row(times[k], states[k]);
    }
    return csv;
}

}  // namespace gp3
