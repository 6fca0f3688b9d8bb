/* GP3 public C API: certified analysis of Gaussian process posterior means.
 *
 * All functions return gp3_status; GP3_OK is zero. On failure a thread-local
 * message is available from gp3_last_error(). Handles are opaque and freed
 * with their matching _destroy function; passing NULL where a handle or
 * output pointer is required yields GP3_ERROR_INVALID_ARGUMENT.
 */
#ifndef GP3_H
#define GP3_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define GP3_VERSION_MAJOR 0
#define GP3_VERSION_MINOR 1
#define GP3_VERSION_PATCH 0

typedef enum gp3_status {
    GP3_OK = 0,
    GP3_ERROR_INVALID_ARGUMENT = 1,
    GP3_ERROR_DIMENSION_MISMATCH = 2,
    GP3_ERROR_NOT_POSITIVE_DEFINITE = 3,
    GP3_ERROR_NUMERIC = 4,
    GP3_ERROR_CONFIG = 5,
    GP3_ERROR_IO = 6,
} gp3_status;

typedef enum gp3_kernel_family {
    GP3_KERNEL_SQUARED_EXPONENTIAL = 0,
    GP3_KERNEL_MATERN32 = 1,
    GP3_KERNEL_MATERN52 = 2,
} gp3_kernel_family;

const char* gp3_status_name(gp3_status status);

/* Thread-local description of the most recent failure in this thread. */
const char* gp3_last_error(void);

void gp3_version(int* major, int* minor, int* patch);

/* ---- kernels and models ---- */

typedef struct gp3_kernel gp3_kernel;
typedef struct gp3_model gp3_model;

gp3_status gp3_kernel_create(gp3_kernel_family family, double signal_variance,
                             const double* length_scales, int dim, gp3_kernel** out);
void gp3_kernel_destroy(gp3_kernel* kernel);

gp3_status gp3_kernel_eval(const gp3_kernel* kernel, const double* x, const double* y,
                           double* out);

/* Bounds on dk(x_train, .)/dx_j over the box [center - half, center + half];
 * j is zero-based. */
gp3_status gp3_kernel_derivative_bounds(const gp3_kernel* kernel, const double* x_train,
                                        const double* center, const double* half_widths, int j,
                                        double* upper, double* lower);

/* inputs is row-major n x dim. */
gp3_status gp3_model_fit(const gp3_kernel* kernel, const double* inputs, const double* targets,
                         int n, int dim, double noise_variance, gp3_model** out);
void gp3_model_destroy(gp3_model* model);

gp3_status gp3_model_dim(const gp3_model* model, int* out);
gp3_status gp3_model_mean(const gp3_model* model, const double* x, double* out);
gp3_status gp3_model_log_marginal_likelihood(const gp3_model* model, double* out);

/* Local Lipschitz constant of the posterior mean over a box. */
gp3_status gp3_model_local_lipschitz(const gp3_model* model, const double* center,
                                     const double* half_widths, double* out);

/* ---- config-driven runs (the CLI surface) ----
 *
 * config_path names a JSON config file; overrides_json is an optional JSON
 * object merged over it (pass NULL or "" for none). Outputs land in the
 * configured output directory together with manifest.json.
 */
gp3_status gp3_run_lipschitz(const char* config_path, const char* overrides_json);
gp3_status gp3_run_verify(const char* config_path, const char* overrides_json);
gp3_status gp3_run_roa(const char* config_path, const char* overrides_json);

/* Trajectory CSV (header t,x1..xd; rows at k*dt) for system "smib" or
 * "linear". params_json may carry m1/d1/a12/theta1 for smib; NULL for
 * defaults. *csv_out is allocated and must be freed with gp3_string_free. */
gp3_status gp3_simulate_csv(const char* system_id, const double* x0, int dim, long long steps,
                            double dt, const char* params_json, char** csv_out);
void gp3_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* GP3_H */
