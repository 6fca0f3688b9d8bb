#pragma once

#include <string>

namespace gp3 {

// Config-file driven runs behind the public C API. overrides_json is an
// optional JSON object deep-merged over the file (flags win); the reserved
// key "kernel_filter" restricts a lipschitz kernel list to one family.
// All failures surface as exceptions.
void drive_lipschitz(const std::string& config_path, const std::string& overrides_json);
void drive_verify(const std::string& config_path, const std::string& overrides_json);
void drive_roa(const std::string& config_path, const std::string& overrides_json);

// Trajectory CSV (t,x1..xd rows at k*dt) for a registered system:
// "smib" (params_json keys m1,d1,a12,theta1) or "linear" (dx/dt = -x).
std::string simulate_csv(const std::string& system_id, const double* x0, int dim,
                         long long steps, double dt, const std::string& params_json);

}  // namespace gp3
