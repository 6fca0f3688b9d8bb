#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gp3/gp3.h"

TEST_CASE("version and status names") {
    int major = -1, minor = -1, patch = -1;
    gp3_version(&major, &minor, &patch);
    CHECK(major == GP3_VERSION_MAJOR);
    CHECK(minor == GP3_VERSION_MINOR);
    CHECK(patch == GP3_VERSION_PATCH);
    CHECK(std::strcmp(gp3_status_name(GP3_OK), "ok") == 0);
    CHECK(std::strcmp(gp3_status_name(GP3_ERROR_CONFIG), "config") == 0);
}

TEST_CASE("kernel lifecycle and evaluation") {
    const double scales[2] = {1.0, 2.0};
    gp3_kernel* kernel = nullptr;
    REQUIRE(gp3_kernel_create(GP3_KERNEL_SQUARED_EXPONENTIAL, 1.0, scales, 2, &kernel) ==
            GP3_OK);

    const double x[2] = {0.0, 0.0};
    const double y[2] = {1.0, 2.0};
    double value = 0.0;
    REQUIRE(gp3_kernel_eval(kernel, x, y, &value) == GP3_OK);
    CHECK(value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));  // r^2 = 2

    double upper = 0.0, lower = 0.0;
    const double center[2] = {0.5, 0.0};
    const double half[2] = {0.25, 0.25};
    REQUIRE(gp3_kernel_derivative_bounds(kernel, x, center, half, 0, &upper, &lower) ==
            GP3_OK);
    CHECK(lower <= upper);

    gp3_kernel_destroy(kernel);
}

TEST_CASE("invalid arguments produce status codes and messages") {
    gp3_kernel* kernel = nullptr;
    CHECK(gp3_kernel_create(GP3_KERNEL_SQUARED_EXPONENTIAL, 1.0, nullptr, 2, &kernel) ==
          GP3_ERROR_INVALID_ARGUMENT);
    CHECK(std::strlen(gp3_last_error()) > 0);

    const double bad_scales[1] = {-1.0};
    CHECK(gp3_kernel_create(GP3_KERNEL_SQUARED_EXPONENTIAL, 1.0, bad_scales, 1, &kernel) ==
          GP3_ERROR_INVALID_ARGUMENT);

    CHECK(gp3_run_lipschitz("/nonexistent/config.json", nullptr) == GP3_ERROR_CONFIG);
}

TEST_CASE("model fit, mean, and local lipschitz through the C surface") {
    const double scales[1] = {1.0};
    gp3_kernel* kernel = nullptr;
    REQUIRE(gp3_kernel_create(GP3_KERNEL_SQUARED_EXPONENTIAL, 1.0, scales, 1, &kernel) ==
            GP3_OK);

    const double inputs[3] = {-1.0, 0.0, 1.0};
    const double targets[3] = {0.5, 1.0, 0.5};
    gp3_model* model = nullptr;
    REQUIRE(gp3_model_fit(kernel, inputs, targets, 3, 1, 0.01, &model) == GP3_OK);

    int dim = 0;
    REQUIRE(gp3_model_dim(model, &dim) == GP3_OK);
    CHECK(dim == 1);

    double at_zero = 0.0;
    const double zero[1] = {0.0};
    REQUIRE(gp3_model_mean(model, zero, &at_zero) == GP3_OK);
    CHECK(at_zero == doctest::Approx(1.0).epsilon(0.05));

    double lml = 0.0;
    REQUIRE(gp3_model_log_marginal_likelihood(model, &lml) == GP3_OK);
    CHECK(std::isfinite(lml));

    const double half[1] = {1.0};
    double lipschitz = -1.0;
    REQUIRE(gp3_model_local_lipschitz(model, zero, half, &lipschitz) == GP3_OK);
    CHECK(lipschitz >= 0.0);

    // Dimension mismatch surfaces as a status, not a crash.
    gp3_model* bad = nullptr;
    CHECK(gp3_model_fit(kernel, inputs, targets, 3, 2, 0.01, &bad) ==
          GP3_ERROR_DIMENSION_MISMATCH);

    gp3_model_destroy(model);
    gp3_kernel_destroy(kernel);
}

TEST_CASE("simulate returns a parseable trajectory") {
    const double x0[2] = {1.0, 1.0};
    char* csv = nullptr;
    REQUIRE(gp3_simulate_csv("smib", x0, 2, 5, 0.01, nullptr, &csv) == GP3_OK);
    REQUIRE(csv != nullptr);
    const std::string text(csv);
    gp3_string_free(csv);
    CHECK(text.rfind("t,x1,x2\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);  // header + 6 rows

    CHECK(gp3_simulate_csv("warp_drive", x0, 2, 5, 0.01, nullptr, &csv) == GP3_ERROR_CONFIG);
}

TEST_CASE("config-driven lipschitz run produces outputs") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gp3_capi_run";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path config_path = dir / "config.json";
    {
        std::ofstream out(config_path);
        out << R"({
            "kernel": [{"family": "se", "sigma_f2": 0.956, "lengthscales": [1.762, 5.537], "sigma_n2": 0.1}],
            "domain": {"lower": [-6, -4], "upper": [4, 4]},
            "data": {"builtin": "sec51", "samples": 25},
            "lipschitz": {"budget": 64},
            "output_dir": ")" << (dir / "out").string() << R"("
        })";
    }
    REQUIRE(gp3_run_lipschitz(config_path.string().c_str(), "{\"workers\": 2}") == GP3_OK);
    CHECK(fs::exists(dir / "out" / "lipschitz_squared_exponential.csv"));
    CHECK(fs::exists(dir / "out" / "summary.json"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}
