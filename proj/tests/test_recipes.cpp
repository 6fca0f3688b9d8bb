#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "recipes.hpp"

using gp3::Command;
using gp3::RunConfig;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "gp3_recipe_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

RunConfig small_lipschitz_config() {
    return gp3::parse_config(nlohmann::json::parse(R"({
        "kernel": [{"family": "se", "sigma_f2": 0.956, "lengthscales": [1.762, 5.537], "sigma_n2": 0.1},
                   {"family": "matern32", "sigma_f2": 1.274, "lengthscales": [3.755, 15.052], "sigma_n2": 0.1}],
        "domain": {"lower": [-6, -4], "upper": [4, 4]},
        "data": {"builtin": "sec51", "samples": 100},
        "lipschitz": {"budget": 300}
    })"),
                             Command::Lipschitz);
}

RunConfig linear_roa_config(double ball_radius, bool baseline = true) {
    nlohmann::json j = nlohmann::json::parse(R"({
        "kernel": {"family": "se", "sigma_f2": 100.0, "lengthscales": [0.6, 0.6], "sigma_n2": 0.1},
        "domain": {"lower": [-2, -2], "upper": [2, 2]},
        "dynamics": {"system": "linear", "dt": 0.1, "K": 50},
        "problem": {"L_f": 1.0, "b_min": 0.002, "initial_cells": 16},
        "data": {"builtin": "lyapunov", "samples": 225},
        "baseline": {"grid": 100, "steps": 300, "radius": 0.25},
        "exclusions": [{"type": "ball", "center": [0, 0], "radius": 0.0}]
    })");
    j["exclusions"][0]["radius"] = ball_radius;
    if (!baseline) j["baseline"]["enabled"] = false;
    return gp3::parse_config(j, Command::Roa);
}

}  // namespace

TEST_CASE("sec51 target and training grid") {
    Eigen::VectorXd x(2);
    x << 0.0, 0.0;
    CHECK(gp3::sec51_target(x) == doctest::Approx(1.5).epsilon(1e-14));  // 1 - 0 + 1/2

    const auto domain =
        gp3::Hyperrectangle::from_bounds((Eigen::VectorXd(2) << -6, -4).finished(),
                                         (Eigen::VectorXd(2) << 4, 4).finished());
    const auto data = gp3::sec51_training_set(100, domain);
    CHECK(data.size() == 100);
    CHECK(data.inputs.col(0).minCoeff() == -6.0);
    CHECK(data.inputs.col(0).maxCoeff() == 4.0);
    CHECK(data.inputs.col(1).minCoeff() == -4.0);
    CHECK(data.inputs.col(1).maxCoeff() == 4.0);

    // Noise flag: same grid, seeded perturbation of the targets only.
    const auto noisy = gp3::sec51_training_set(100, domain, 0.1, 7);
    CHECK((noisy.inputs - data.inputs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((noisy.targets - data.targets).cwiseAbs().maxCoeff() > 0.0);
    const auto noisy_again = gp3::sec51_training_set(100, domain, 0.1, 7);
    CHECK((noisy.targets - noisy_again.targets).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lipschitz recipe: per-kernel curves with emitted files") {
    const auto dir = fresh_dir("lipschitz");
    const auto result = gp3::run_lipschitz_recipe(small_lipschitz_config(), dir, 2);
    REQUIRE(result.runs.size() == 2);
    for (const auto& run : result.runs) {
        CHECK(run.naive_single_cell == run.envelope.curve.front().lipschitz);
        for (std::size_t i = 1; i < run.envelope.curve.size(); ++i) {
            CHECK(run.envelope.curve[i].lipschitz <=
                  run.envelope.curve[i - 1].lipschitz + 1e-9);
        }
        CHECK(run.envelope.curve.back().cells <= 300);
        REQUIRE(std::filesystem::exists(run.curve_file));
        std::ifstream in(run.curve_file);
        std::string header;
        std::getline(in, header);
        CHECK(header == "cells,L");
    }
    CHECK(std::filesystem::exists(dir / "lipschitz_squared_exponential.csv"));
    CHECK(std::filesystem::exists(dir / "lipschitz_matern32.csv"));
}

TEST_CASE("roa recipe: globally stable linear system certifies nearly everywhere") {
    const auto dir = fresh_dir("roa_linear");
    const auto config = linear_roa_config(0.25);
    const auto result = gp3::run_roa_recipe(config, dir, 2);

    CHECK_FALSE(result.empty_w_warning);
    const auto& report = result.report;

    // W covers at least 95% of the domain volume outside the exclusion ball.
    double w_volume = 0.0;
    for (const std::size_t i : result.w_cells) {
        double v = 1.0;
        for (int k = 0; k < 2; ++k) v *= 2.0 * report.half_widths[i * 2 + k];
        w_volume += v;
    }
    const double domain_volume = 16.0;
    const double ball_volume = M_PI * 0.25 * 0.25;
    CHECK(w_volume >= 0.95 * (domain_volume - ball_volume));

    // V is drawn from W by construction.
    for (const std::size_t v : result.v_cells) {
        CHECK(report.status[v] == gp3::CellStatus::Satisfied);
    }
    CHECK(result.v_cells.size() <= result.w_cells.size());

    // Soundness spot check: sampled decrease within every W-cell certified
    // range.
    std::mt19937 rng(71);
    const gp3::OdeSystem system = gp3::system_from_config(config.dynamics);
    const gp3::IntegratorConfig integ;
    const auto flow = gp3::flow_map(system, config.dynamics.dt, integ);
    const gp3::GpModel model = gp3::fit_from_config(
        config.kernels.front(),
        [&] {
            const auto dataset = gp3::build_lyapunov_dataset(
                system, gp3::domain_from_config(config.domain), 225, 50, 0.1, integ, 2);
            return gp3::TrainingSet(dataset.initial_states, dataset.values);
        }());
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    REQUIRE(!result.w_cells.empty());
    for (int s = 0; s < 60; ++s) {
        const std::size_t i = result.w_cells[rng() % result.w_cells.size()];
        Eigen::VectorXd x = report.center(i);
        for (int k = 0; k < 2; ++k) x[k] += unit(rng) * report.half_widths[i * 2 + k];
        const double decrease = model.mean(flow(x)) - model.mean(x);
        CHECK(decrease <= report.hi[i] + 1e-9);
        CHECK(decrease <= 1e-9);  // certified hi <= 0 implies decrease
    }

    // Baseline: globally stable, every trajectory converges.
    REQUIRE(result.has_baseline);
    for (const auto c : result.baseline.converged) CHECK(c == 1);

    CHECK(std::filesystem::exists(dir / "w_cells.csv"));
    CHECK(std::filesystem::exists(dir / "v_cells.csv"));
    CHECK(std::filesystem::exists(dir / "baseline.csv"));
}

TEST_CASE("roa recipe: exclusion covering the domain leaves nothing to verify") {
    const auto dir = fresh_dir("roa_everything");
    const auto config = linear_roa_config(10.0, false);
    const auto result = gp3::run_roa_recipe(config, dir, 2);
    CHECK(result.empty_w_warning);
    CHECK(result.w_cells.empty());
    CHECK(result.v_cells.empty());
    CHECK(std::isinf(result.c_star));
    for (std::size_t i = 0; i < result.report.size(); ++i) {
        CHECK(result.report.status[i] == gp3::CellStatus::AssumedVerified);
    }
    CHECK_FALSE(result.has_baseline);
}

TEST_CASE("roa recipe: deterministic across repeated runs") {
    const auto config = linear_roa_config(0.25, false);
    const auto r1 = gp3::run_roa_recipe(config, fresh_dir("roa_det1"), 1);
    const auto r2 = gp3::run_roa_recipe(config, fresh_dir("roa_det2"), 3);
    CHECK(r1.report.size() == r2.report.size());
    CHECK(r1.w_cells.size() == r2.w_cells.size());
    CHECK(r1.v_cells.size() == r2.v_cells.size());
    CHECK(r1.c_star == r2.c_star);
}
