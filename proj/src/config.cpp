#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace gp3 {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

double get_number(const json& obj, const char* key, const std::string& where,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(where + " requires key '" + std::string(key) + "'");
    }
    if (!obj[key].is_number()) {
        throw ConfigError(where + "." + key + " must be a number");
    }
    return obj[key].get<double>();
}

// Numbers or the string "inf" for unbounded targets.
double get_extended(const json& obj, const char* key, double fallback,
                    const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj[key];
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v == "inf" || v == "+inf" || v == "infinity")) {
        return std::numeric_limits<double>::infinity();
    }
    throw ConfigError(where + "." + key + " must be a number or \"inf\"");
}

std::vector<double> get_vector(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_array() || obj[key].empty()) {
        throw ConfigError(where + "." + key + " must be a non-empty array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number()) {
            throw ConfigError(where + "." + key + " must contain only numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

KernelConfig parse_kernel(const json& j, const std::string& where) {
    check_keys(j, {"family", "sigma_f2", "lengthscales", "sigma_n2", "optimize"}, where);
    KernelConfig k;
    if (!j.contains("family") || !j["family"].is_string()) {
        throw ConfigError(where + ".family must be a string");
    }
    k.family = kernel_family_from_name(j["family"].get<std::string>());
    k.sigma_f2 = get_number(j, "sigma_f2", where, 1.0);
    k.lengthscales = get_vector(j, "lengthscales", where);
    k.sigma_n2 = get_number(j, "sigma_n2", where, 0.0);
    if (j.contains("optimize")) {
        const auto& o = j["optimize"];
        check_keys(o, {"enabled", "restarts", "seed", "fix_noise"}, where + ".optimize");
        k.optimize = o.value("enabled", true);
        k.restarts = o.value("restarts", 4);
        k.seed = o.value("seed", 1u);
        k.fix_noise = o.value("fix_noise", true);
    }
    if (!(k.sigma_f2 > 0.0)) throw ConfigError(where + ".sigma_f2 must be positive");
    if (!(k.sigma_n2 >= 0.0)) throw ConfigError(where + ".sigma_n2 must be >= 0");
    for (double l : k.lengthscales) {
        if (!(l > 0.0)) throw ConfigError(where + ".lengthscales must be positive");
    }
    return k;
}

DomainConfig parse_domain(const json& j) {
    check_keys(j, {"lower", "upper"}, "domain");
    DomainConfig d;
    d.lower = get_vector(j, "lower", "domain");
    d.upper = get_vector(j, "upper", "domain");
    if (d.lower.size() != d.upper.size()) {
        throw ConfigError("domain.lower and domain.upper must have equal length");
    }
    for (std::size_t i = 0; i < d.lower.size(); ++i) {
        if (!(d.lower[i] <= d.upper[i])) {
            throw ConfigError("domain.lower must not exceed domain.upper");
        }
    }
    return d;
}

ProblemConfig parse_problem(const json& j) {
    check_keys(j,
               {"g", "f", "L_f", "L_g", "eps1_bar", "eps2_bar", "b_min", "initial_cells"},
               "problem");
    ProblemConfig p;
    p.g = j.value("g", "mean");
    p.f = j.value("f", "identity");
    if (p.g != "mean" && p.g != "table" && p.g != "sec51") {
        throw ConfigError("problem.g must be one of: mean, table, sec51");
    }
    if (p.f != "identity" && p.f != "nearest_grid" && p.f != "flow_map") {
        throw ConfigError("problem.f must be one of: identity, nearest_grid, flow_map");
    }
    p.l_f = get_number(j, "L_f", "problem", 1.0);
    p.l_g = get_number(j, "L_g", "problem", 0.0);
    if (p.g != "mean" && !(p.l_g > 0.0)) {
        throw ConfigError("problem.L_g must be positive when g is not 'mean'");
    }
    p.eps1_bar = get_extended(j, "eps1_bar", std::numeric_limits<double>::infinity(), "problem");
    p.eps2_bar = get_extended(j, "eps2_bar", std::numeric_limits<double>::infinity(), "problem");
    p.b_min = get_number(j, "b_min", "problem", 1e-9);
    if (!(p.b_min > 0.0)) throw ConfigError("problem.b_min must be positive");
    p.initial_cells = static_cast<long long>(get_number(j, "initial_cells", "problem", 1.0));
    if (p.initial_cells < 1) throw ConfigError("problem.initial_cells must be >= 1");
    return p;
}

DynamicsConfig parse_dynamics(const json& j) {
    check_keys(j, {"system", "m1", "d1", "a12", "theta1", "dt", "K"}, "dynamics");
    DynamicsConfig d;
    d.system = j.value("system", "smib");
    if (d.system != "smib" && d.system != "linear") {
        throw ConfigError("dynamics.system must be 'smib' or 'linear'");
    }
    d.m1 = get_number(j, "m1", "dynamics", 1.0);
    d.d1 = get_number(j, "d1", "dynamics", 20.0);
    d.a12 = get_number(j, "a12", "dynamics", 10.0);
    d.theta1 = get_number(j, "theta1", "dynamics", 0.05002085680577375);
    d.dt = get_number(j, "dt", "dynamics", 0.01);
    d.horizon = static_cast<int>(get_number(j, "K", "dynamics", 1000.0));
    if (d.m1 == 0.0) throw ConfigError("dynamics.m1 must be nonzero");
    if (!(d.dt > 0.0)) throw ConfigError("dynamics.dt must be positive");
    if (d.horizon < 0) throw ConfigError("dynamics.K must be >= 0");
    return d;
}

ExclusionConfig parse_exclusion(const json& j, const std::string& where) {
    ExclusionConfig e;
    if (!j.contains("type") || !j["type"].is_string()) {
        throw ConfigError(where + ".type must be 'ball' or 'box'");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "ball") {
        check_keys(j, {"type", "center", "radius"}, where);
        e.is_ball = true;
        e.center = get_vector(j, "center", where);
        e.radius = get_number(j, "radius", where);
        if (!(e.radius > 0.0)) throw ConfigError(where + ".radius must be positive");
    } else if (type == "box") {
        check_keys(j, {"type", "lower", "upper"}, where);
        e.is_ball = false;
        e.lower = get_vector(j, "lower", where);
        e.upper = get_vector(j, "upper", where);
    } else {
        throw ConfigError(where + ".type must be 'ball' or 'box'");
    }
    return e;
}

DataConfig parse_data(const json& j) {
    check_keys(j, {"file", "builtin", "samples", "noise_sigma2", "seed"}, "data");
    DataConfig d;
    d.file = j.value("file", "");
    d.builtin = j.value("builtin", "");
    d.samples = static_cast<long long>(get_number(j, "samples", "data", 0.0));
    d.noise_sigma2 = get_number(j, "noise_sigma2", "data", 0.0);
    d.seed = static_cast<unsigned>(get_number(j, "seed", "data", 0.0));
    if (d.file.empty() == d.builtin.empty()) {
        throw ConfigError("data requires exactly one of 'file' or 'builtin'");
    }
    if (!d.builtin.empty() && d.builtin != "sec51" && d.builtin != "lyapunov") {
        throw ConfigError("data.builtin must be 'sec51' or 'lyapunov'");
    }
    if (!d.builtin.empty() && d.samples < 1) {
        throw ConfigError("data.samples must be >= 1 for builtin data");
    }
    if (d.noise_sigma2 < 0.0) {
        throw ConfigError("data.noise_sigma2 must be >= 0");
    }
    return d;
}

}  // namespace

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
}

nlohmann::json merge_overrides(nlohmann::json base, const nlohmann::json& overrides) {
    if (!overrides.is_object() || !base.is_object()) {
        return overrides.is_null() ? base : overrides;
    }
    for (const auto& item : overrides.items()) {
        if (base.contains(item.key()) && base[item.key()].is_object() &&
            item.value().is_object()) {
            base[item.key()] = merge_overrides(base[item.key()], item.value());
        } else {
            base[item.key()] = item.value();
        }
    }
    return base;
}

RunConfig parse_config(const nlohmann::json& j, Command command) {
    static const std::set<std::string> kTop = {"kernel",     "domain",   "problem",
                                              "dynamics",   "exclusions", "data",
                                              "lipschitz",  "baseline", "output_dir",
                                              "workers"};
    check_keys(j, kTop, "config");

    RunConfig config;
    if (!j.contains("kernel")) throw ConfigError("config requires 'kernel'");
    if (j["kernel"].is_array()) {
        if (command != Command::Lipschitz) {
            throw ConfigError("only the lipschitz command accepts a kernel list");
        }
        int idx = 0;
        for (const auto& k : j["kernel"]) {
            config.kernels.push_back(parse_kernel(k, "kernel[" + std::to_string(idx++) + "]"));
        }
        if (config.kernels.empty()) throw ConfigError("kernel list is empty");
    } else {
        config.kernels.push_back(parse_kernel(j["kernel"], "kernel"));
    }

    if (!j.contains("domain")) throw ConfigError("config requires 'domain'");
    config.domain = parse_domain(j["domain"]);

    const std::size_t d = config.domain.lower.size();
    for (const auto& k : config.kernels) {
        if (k.lengthscales.size() != d) {
            throw ConfigError("kernel lengthscales dimension does not match domain");
        }
    }

    if (j.contains("problem")) config.problem = parse_problem(j["problem"]);
    if (j.contains("dynamics")) {
        config.dynamics = parse_dynamics(j["dynamics"]);
        config.has_dynamics = true;
    }
    if (j.contains("exclusions")) {
        if (!j["exclusions"].is_array()) throw ConfigError("exclusions must be an array");
        int idx = 0;
        for (const auto& e : j["exclusions"]) {
            auto parsed = parse_exclusion(e, "exclusions[" + std::to_string(idx++) + "]");
            const std::size_t ed =
                parsed.is_ball ? parsed.center.size() : parsed.lower.size();
            if (ed != d) throw ConfigError("exclusion dimension does not match domain");
            config.exclusions.push_back(std::move(parsed));
        }
    }
    if (j.contains("data")) {
        config.data = parse_data(j["data"]);
        config.has_data = true;
    }
    if (j.contains("lipschitz")) {
        check_keys(j["lipschitz"], {"budget"}, "lipschitz");
        config.lipschitz.budget =
            static_cast<long long>(get_number(j["lipschitz"], "budget", "lipschitz", 2000.0));
        if (config.lipschitz.budget < 1) throw ConfigError("lipschitz.budget must be >= 1");
    }
    if (j.contains("baseline")) {
        check_keys(j["baseline"], {"enabled", "grid", "steps", "radius"}, "baseline");
        config.baseline.enabled = j["baseline"].value("enabled", true);
        config.baseline.grid =
            static_cast<long long>(get_number(j["baseline"], "grid", "baseline", 4000.0));
        config.baseline.steps =
            static_cast<long long>(get_number(j["baseline"], "steps", "baseline", 10000.0));
        config.baseline.radius = get_number(j["baseline"], "radius", "baseline", 0.0);
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
        config.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("workers")) {
        if (!j["workers"].is_number_integer()) throw ConfigError("workers must be an integer");
        config.workers = j["workers"].get<int>();
        if (config.workers < 0) throw ConfigError("workers must be >= 0");
    }

    // Per-command requirements.
    switch (command) {
        case Command::Lipschitz:
            if (!config.has_data) throw ConfigError("lipschitz command requires 'data'");
            break;
        case Command::Verify:
            if (!config.has_data) throw ConfigError("verify command requires 'data'");
            if (config.kernels.size() != 1) {
                throw ConfigError("verify command requires a single kernel");
            }
            if (config.problem.f == "flow_map" && !config.has_dynamics) {
                throw ConfigError("problem.f = flow_map requires a 'dynamics' section");
            }
            break;
        case Command::Roa:
            if (!config.has_dynamics) throw ConfigError("roa command requires 'dynamics'");
            if (config.kernels.size() != 1) {
                throw ConfigError("roa command requires a single kernel");
            }
            break;
    }
    return config;
}

nlohmann::json echo_config(const RunConfig& config, Command command) {
    json j;
    auto kernel_to_json = [](const KernelConfig& k) {
        json kj;
        kj["family"] = kernel_family_name(k.family);
        kj["sigma_f2"] = k.sigma_f2;
        kj["lengthscales"] = k.lengthscales;
        kj["sigma_n2"] = k.sigma_n2;
        if (k.optimize) {
            kj["optimize"] = {{"enabled", true},
                              {"restarts", k.restarts},
                              {"seed", k.seed},
                              {"fix_noise", k.fix_noise}};
        }
        return kj;
    };
    if (config.kernels.size() == 1 && command != Command::Lipschitz) {
        j["kernel"] = kernel_to_json(config.kernels.front());
    } else {
        j["kernel"] = json::array();
        for (const auto& k : config.kernels) j["kernel"].push_back(kernel_to_json(k));
    }
    j["domain"] = {{"lower", config.domain.lower}, {"upper", config.domain.upper}};

    json p;
    p["g"] = config.problem.g;
    p["f"] = config.problem.f;
    p["L_f"] = config.problem.l_f;
    if (config.problem.l_g > 0.0) p["L_g"] = config.problem.l_g;
    p["eps1_bar"] = std::isinf(config.problem.eps1_bar) ? json("inf")
                                                        : json(config.problem.eps1_bar);
    p["eps2_bar"] = std::isinf(config.problem.eps2_bar) ? json("inf")
                                                        : json(config.problem.eps2_bar);
    p["b_min"] = config.problem.b_min;
    p["initial_cells"] = config.problem.initial_cells;
    j["problem"] = std::move(p);

    if (config.has_dynamics) {
        j["dynamics"] = {{"system", config.dynamics.system}, {"m1", config.dynamics.m1},
                         {"d1", config.dynamics.d1},         {"a12", config.dynamics.a12},
                         {"theta1", config.dynamics.theta1}, {"dt", config.dynamics.dt},
                         {"K", config.dynamics.horizon}};
    }
    if (!config.exclusions.empty()) {
        j["exclusions"] = json::array();
        for (const auto& e : config.exclusions) {
            if (e.is_ball) {
                j["exclusions"].push_back(
                    {{"type", "ball"}, {"center", e.center}, {"radius", e.radius}});
            } else {
                j["exclusions"].push_back(
                    {{"type", "box"}, {"lower", e.lower}, {"upper", e.upper}});
            }
        }
    }
    if (config.has_data) {
        json dj;
        if (!config.data.file.empty()) {
            dj["file"] = config.data.file;
        } else {
            dj["builtin"] = config.data.builtin;
        }
        if (config.data.samples > 0) dj["samples"] = config.data.samples;
        if (config.data.noise_sigma2 > 0.0) {
            dj["noise_sigma2"] = config.data.noise_sigma2;
            dj["seed"] = config.data.seed;
        }
        j["data"] = std::move(dj);
    }
    if (command == Command::Lipschitz) {
        j["lipschitz"] = {{"budget", config.lipschitz.budget}};
    }
    if (command == Command::Roa) {
        j["baseline"] = {{"enabled", config.baseline.enabled},
                         {"grid", config.baseline.grid},
                         {"steps", config.baseline.steps},
                         {"radius", config.baseline.radius}};
    }
    j["output_dir"] = config.output_dir;
    j["workers"] = config.workers;
    return j;
}

int effective_workers(const RunConfig& config) {
    if (config.workers > 0) return config.workers;
    if (const char* env = std::getenv("GP3_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 0;
}

}  // namespace gp3
