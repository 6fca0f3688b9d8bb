// gp3 command line tool. All functionality lives behind the libgp3 C API;
// this layer only parses flags, assembles config overrides, and maps status
// codes to exit codes (0 success, 2 usage/config, 3 numerical failure).

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gp3/gp3.h"

namespace {

int exit_code_for(gp3_status status) {
    switch (status) {
        case GP3_OK: return 0;
        case GP3_ERROR_INVALID_ARGUMENT:
        case GP3_ERROR_DIMENSION_MISMATCH:
        case GP3_ERROR_CONFIG:
        case GP3_ERROR_IO: return 2;
        case GP3_ERROR_NOT_POSITIVE_DEFINITE:
        case GP3_ERROR_NUMERIC: return 3;
    }
    return 3;
}

int report_failure(gp3_status status) {
    std::fprintf(stderr, "gp3: error (%s): %s\n", gp3_status_name(status), gp3_last_error());
    return exit_code_for(status);
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GP3: certified analysis of Gaussian process posterior means"};
    app.require_subcommand(1);

    std::string config_path;
    std::string kernel_filter;
    std::string output_dir;
    long long budget = -1;
    int workers = -1;

    auto* lipschitz = app.add_subcommand("lipschitz", "Lipschitz-constant bounding curves");
    lipschitz->add_option("--config", config_path, "JSON config file")->required();
    lipschitz->add_option("--kernel", kernel_filter, "restrict to one kernel family");
    lipschitz->add_option("--budget", budget, "cell budget override");
    lipschitz->add_option("--output", output_dir, "output directory override");
    lipschitz->add_option("--workers", workers, "worker count override");

    auto* verify = app.add_subcommand("verify", "two-sided bound verification");
    verify->add_option("--config", config_path, "JSON config file")->required();
    verify->add_option("--output", output_dir, "output directory override");
    verify->add_option("--workers", workers, "worker count override");

    auto* roa = app.add_subcommand("roa", "region-of-attraction certification");
    bool skip_baseline = false;
    double m1_override = 0.0;
    roa->add_option("--config", config_path, "JSON config file")->required();
    roa->add_flag("--skip-baseline", skip_baseline, "skip the trajectory baseline");
    roa->add_option("--m1", m1_override, "inertia override");
    roa->add_option("--output", output_dir, "output directory override");
    roa->add_option("--workers", workers, "worker count override");

    auto* simulate = app.add_subcommand("simulate", "print a trajectory as CSV");
    std::string system_id;
    std::vector<double> x0;
    long long steps = 100;
    double dt = 0.01;
    double sim_m1 = 1.0;
    simulate->add_option("system", system_id, "system id (smib, linear)")->required();
    simulate->add_option("--x0", x0, "initial state components")->required();
    simulate->add_option("--steps", steps, "number of samples");
    simulate->add_option("--dt", dt, "sample interval");
    simulate->add_option("--m1", sim_m1, "smib inertia");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (simulate->parsed()) {
        char* csv = nullptr;
        std::string params = "{\"m1\": " + std::to_string(sim_m1) + "}";
        const gp3_status status =
            gp3_simulate_csv(system_id.c_str(), x0.data(), static_cast<int>(x0.size()), steps,
                             dt, system_id == "smib" ? params.c_str() : nullptr, &csv);
        if (status != GP3_OK) return report_failure(status);
        std::fputs(csv, stdout);
        gp3_string_free(csv);
        return 0;
    }

    // Assemble overrides from flags; flags win over config and environment.
    std::string overrides = "{";
    auto append = [&overrides](const std::string& fragment) {
        if (overrides.size() > 1) overrides += ",";
        overrides += fragment;
    };
    if (!kernel_filter.empty()) {
        append("\"kernel_filter\": \"" + json_escape(kernel_filter) + "\"");
    }
    if (budget >= 0) append("\"lipschitz\": {\"budget\": " + std::to_string(budget) + "}");
    if (!output_dir.empty()) append("\"output_dir\": \"" + json_escape(output_dir) + "\"");
    if (workers >= 0) append("\"workers\": " + std::to_string(workers));
    if (roa->parsed()) {
        if (skip_baseline) append("\"baseline\": {\"enabled\": false}");
        if (roa->count("--m1") > 0) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", m1_override);
            append("\"dynamics\": {\"m1\": " + std::string(buf) + "}");
        }
    }
    overrides += "}";

    gp3_status status = GP3_OK;
    if (lipschitz->parsed()) {
        status = gp3_run_lipschitz(config_path.c_str(), overrides.c_str());
    } else if (verify->parsed()) {
        status = gp3_run_verify(config_path.c_str(), overrides.c_str());
    } else if (roa->parsed()) {
        status = gp3_run_roa(config_path.c_str(), overrides.c_str());
    }
    if (status != GP3_OK) return report_failure(status);
    return 0;
}
