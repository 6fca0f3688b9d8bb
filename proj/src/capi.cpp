#include "gp3/gp3.h"

#include <cstring>
#include <string>

#include "driver.hpp"
#include "io.hpp"
#include "recipes.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const char* what) { g_last_error = what ? what : "unknown error"; }

gp3_status classify(const std::exception& e) {
    set_error(e.what());
    if (dynamic_cast<const gp3::ConfigError*>(&e)) return GP3_ERROR_CONFIG;
    if (dynamic_cast<const gp3::IoError*>(&e)) return GP3_ERROR_IO;
    if (dynamic_cast<const gp3::NotPositiveDefinite*>(&e)) return GP3_ERROR_NOT_POSITIVE_DEFINITE;
    if (dynamic_cast<const std::invalid_argument*>(&e)) {
        return std::strstr(e.what(), "mismatch") ? GP3_ERROR_DIMENSION_MISMATCH
                                                 : GP3_ERROR_INVALID_ARGUMENT;
    }
    return GP3_ERROR_NUMERIC;
}

template <typename Fn>
gp3_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return classify(e);
    } catch (...) {
        set_error("unknown error");
        return GP3_ERROR_NUMERIC;
    }
}

gp3::KernelFamily to_family(gp3_kernel_family family) {
    switch (family) {
        case GP3_KERNEL_SQUARED_EXPONENTIAL: return gp3::KernelFamily::SquaredExponential;
        case GP3_KERNEL_MATERN32: return gp3::KernelFamily::Matern32;
        case GP3_KERNEL_MATERN52: return gp3::KernelFamily::Matern52;
    }
    throw std::invalid_argument("unknown kernel family code");
}

}  // namespace

struct gp3_kernel {
    gp3::KernelSpec spec;
};

struct gp3_model {
    gp3::GpModel model;
};

extern "C" {

const char* gp3_status_name(gp3_status status) {
    switch (status) {
        case GP3_OK: return "ok";
        case GP3_ERROR_INVALID_ARGUMENT: return "invalid_argument";
        case GP3_ERROR_DIMENSION_MISMATCH: return "dimension_mismatch";
        case GP3_ERROR_NOT_POSITIVE_DEFINITE: return "not_positive_definite";
        case GP3_ERROR_NUMERIC: return "numeric";
        case GP3_ERROR_CONFIG: return "config";
        case GP3_ERROR_IO: return "io";
    }
    return "unknown";
}

const char* gp3_last_error(void) { return g_last_error.c_str(); }

void gp3_version(int* major, int* minor, int* patch) {
    if (major) *major = GP3_VERSION_MAJOR;
    if (minor) *minor = GP3_VERSION_MINOR;
    if (patch) *patch = GP3_VERSION_PATCH;
}

gp3_status gp3_kernel_create(gp3_kernel_family family, double signal_variance,
                             const double* length_scales, int dim, gp3_kernel** out) {
    return guarded([&]() -> gp3_status {
        if (!length_scales || !out || dim < 1) {
            set_error("gp3_kernel_create: null argument or dim < 1");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        Eigen::VectorXd scales = Eigen::Map<const Eigen::VectorXd>(length_scales, dim);
        *out = new gp3_kernel{gp3::KernelSpec(to_family(family), signal_variance, scales)};
        return GP3_OK;
    });
}

void gp3_kernel_destroy(gp3_kernel* kernel) { delete kernel; }

gp3_status gp3_kernel_eval(const gp3_kernel* kernel, const double* x, const double* y,
                           double* out) {
    return guarded([&]() -> gp3_status {
        if (!kernel || !x || !y || !out) {
            set_error("gp3_kernel_eval: null argument");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        const int d = kernel->spec.dim();
        *out = gp3::kernel_eval(kernel->spec, Eigen::Map<const Eigen::VectorXd>(x, d),
                                Eigen::Map<const Eigen::VectorXd>(y, d));
        return GP3_OK;
    });
}

gp3_status gp3_kernel_derivative_bounds(const gp3_kernel* kernel, const double* x_train,
                                        const double* center, const double* half_widths, int j,
                                        double* upper, double* lower) {
    return guarded([&]() -> gp3_status {
        if (!kernel || !x_train || !center || !half_widths || !upper || !lower) {
            set_error("gp3_kernel_derivative_bounds: null argument");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        const int d = kernel->spec.dim();
        const gp3::Hyperrectangle cell(Eigen::Map<const Eigen::VectorXd>(center, d),
                                       Eigen::Map<const Eigen::VectorXd>(half_widths, d));
        const auto bounds = gp3::derivative_bounds(
            kernel->spec, Eigen::Map<const Eigen::VectorXd>(x_train, d), cell, j);
        *upper = bounds.upper;
        *lower = bounds.lower;
        return GP3_OK;
    });
}

gp3_status gp3_model_fit(const gp3_kernel* kernel, const double* inputs, const double* targets,
                         int n, int dim, double noise_variance, gp3_model** out) {
    return guarded([&]() -> gp3_status {
        if (!kernel || !inputs || !targets || !out || n < 1 || dim < 1) {
            set_error("gp3_model_fit: null argument or empty data");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        if (dim != kernel->spec.dim()) {
            set_error("gp3_model_fit: data dimension does not match kernel");
            return GP3_ERROR_DIMENSION_MISMATCH;
        }
        Eigen::MatrixXd x =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(inputs, n, dim);
        Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets, n);
        *out = new gp3_model{
            gp3::fit(gp3::TrainingSet(std::move(x), std::move(y)), kernel->spec,
                     noise_variance)};
        return GP3_OK;
    });
}

void gp3_model_destroy(gp3_model* model) { delete model; }

gp3_status gp3_model_dim(const gp3_model* model, int* out) {
    if (!model || !out) {
        set_error("gp3_model_dim: null argument");
        return GP3_ERROR_INVALID_ARGUMENT;
    }
    *out = model->model.dim();
    return GP3_OK;
}

gp3_status gp3_model_mean(const gp3_model* model, const double* x, double* out) {
    return guarded([&]() -> gp3_status {
        if (!model || !x || !out) {
            set_error("gp3_model_mean: null argument");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        *out = model->model.mean(Eigen::Map<const Eigen::VectorXd>(x, model->model.dim()));
        return GP3_OK;
    });
}

gp3_status gp3_model_log_marginal_likelihood(const gp3_model* model, double* out) {
    if (!model || !out) {
        set_error("gp3_model_log_marginal_likelihood: null argument");
        return GP3_ERROR_INVALID_ARGUMENT;
    }
    *out = model->model.log_marginal_likelihood();
    return GP3_OK;
}

gp3_status gp3_model_local_lipschitz(const gp3_model* model, const double* center,
                                     const double* half_widths, double* out) {
    return guarded([&]() -> gp3_status {
        if (!model || !center || !half_widths || !out) {
            set_error("gp3_model_local_lipschitz: null argument");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        const int d = model->model.dim();
        const gp3::Hyperrectangle cell(Eigen::Map<const Eigen::VectorXd>(center, d),
                                       Eigen::Map<const Eigen::VectorXd>(half_widths, d));
        *out = gp3::local_lipschitz(model->model, cell);
        return GP3_OK;
    });
}

gp3_status gp3_run_lipschitz(const char* config_path, const char* overrides_json) {
    return guarded([&]() -> gp3_status {
        if (!config_path) {
            set_error("gp3_run_lipschitz: null config path");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        gp3::drive_lipschitz(config_path, overrides_json ? overrides_json : "");
        return GP3_OK;
    });
}

gp3_status gp3_run_verify(const char* config_path, const char* overrides_json) {
    return guarded([&]() -> gp3_status {
        if (!config_path) {
            set_error("gp3_run_verify: null config path");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        gp3::drive_verify(config_path, overrides_json ? overrides_json : "");
        return GP3_OK;
    });
}

gp3_status gp3_run_roa(const char* config_path, const char* overrides_json) {
    return guarded([&]() -> gp3_status {
        if (!config_path) {
            set_error("gp3_run_roa: null config path");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        gp3::drive_roa(config_path, overrides_json ? overrides_json : "");
        return GP3_OK;
    });
}

gp3_status gp3_simulate_csv(const char* system_id, const double* x0, int dim, long long steps,
                            double dt, const char* params_json, char** csv_out) {
    return guarded([&]() -> gp3_status {
        if (!system_id || !x0 || !csv_out || dim < 1) {
            set_error("gp3_simulate_csv: null argument");
            return GP3_ERROR_INVALID_ARGUMENT;
        }
        const std::string csv =
            gp3::simulate_csv(system_id, x0, dim, steps, dt, params_json ? params_json : "");
        char* buffer = new char[csv.size() + 1];
        std::memcpy(buffer, csv.c_str(), csv.size() + 1);
        *csv_out = buffer;
        return GP3_OK;
    });
}

void gp3_string_free(char* s) { delete[] s; }

}  // extern "C"
