#include "io.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gp3 {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    for (auto& f : fields) {
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) f.erase(0, 1);
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) f.pop_back();
    }
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("invalid numeric field '" + s + "' in " + context);
    }
}

void format_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace

TrainingSet read_training_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open training data file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty training data file: " + path.string());
    }
    const auto header = split_line(line);
    if (header.size() < 2 || header.back() != "y") {
        throw IoError("training CSV header must be x1,...,xd,y");
    }
    const int d = static_cast<int>(header.size()) - 1;
    for (int k = 0; k < d; ++k) {
        if (header[k] != "x" + std::to_string(k + 1)) {
            throw IoError("training CSV header must be x1,...,xd,y; got column '" + header[k] +
                          "'");
        }
    }

    std::vector<double> values;
    long long rows = 0;
    long long line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_line(line);
        if (static_cast<int>(fields.size()) != d + 1) {
            throw IoError("row " + std::to_string(line_number) + " of " + path.string() +
                          " has " + std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(d + 1));
        }
        for (const auto& f : fields) {
            values.push_back(parse_double(f, path.string() + ":" + std::to_string(line_number)));
        }
        ++rows;
    }
    if (rows == 0) {
        throw IoError("training data file has no rows: " + path.string());
    }
    Eigen::MatrixXd inputs(rows, d);
    Eigen::VectorXd targets(rows);
    for (long long r = 0; r < rows; ++r) {
        for (int k = 0; k < d; ++k) inputs(r, k) = values[r * (d + 1) + k];
        targets[r] = values[r * (d + 1) + d];
    }
    return TrainingSet(std::move(inputs), std::move(targets));
}

void write_training_csv(const std::filesystem::path& path, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const int d = static_cast<int>(inputs.cols());
    std::string line;
    for (int k = 0; k < d; ++k) line += "x" + std::to_string(k + 1) + ",";
    line += "y\n";
    out << line;
    for (long long r = 0; r < inputs.rows(); ++r) {
        line.clear();
        for (int k = 0; k < d; ++k) {
            format_double(line, inputs(r, k));
            line += ',';
        }
        format_double(line, targets[r]);
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_cells_csv(const std::filesystem::path& path, const VerificationReport& report,
                     const std::vector<std::size_t>& indices, bool all_cells) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const int d = report.dim;
    std::string line;
    for (int k = 0; k < d; ++k) line += "c" + std::to_string(k + 1) + ",";
    for (int k = 0; k < d; ++k) line += "b" + std::to_string(k + 1) + ",";
    line += "lo,hi,L_mu,status\n";
    out << line;

    const std::size_t n = all_cells ? report.size() : indices.size();
    for (std::size_t ii = 0; ii < n; ++ii) {
        const std::size_t i = all_cells ? ii : indices[ii];
        line.clear();
        for (int k = 0; k < d; ++k) {
            format_double(line, report.centers[i * d + k]);
            line += ',';
        }
        for (int k = 0; k < d; ++k) {
            format_double(line, report.half_widths[i * d + k]);
            line += ',';
        }
        format_double(line, report.lo[i]);
        line += ',';
        format_double(line, report.hi[i]);
        line += ',';
        format_double(line, report.l_mu[i]);
        line += ',';
        line += cell_status_name(report.status[i]);
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_report_json(const std::filesystem::path& path, const VerificationReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    const int d = report.dim;
    for (std::size_t i = 0; i < report.size(); ++i) {
        nlohmann::json cell;
        cell["c"] = std::vector<double>(report.centers.begin() + i * d,
                                        report.centers.begin() + (i + 1) * d);
        cell["b"] = std::vector<double>(report.half_widths.begin() + i * d,
                                        report.half_widths.begin() + (i + 1) * d);
        cell["lo"] = report.lo[i];
        cell["hi"] = report.hi[i];
        cell["L_mu"] = report.l_mu[i];
        cell["status"] = cell_status_name(report.status[i]);
        cell["depth"] = report.depth[i];
        cells.push_back(std::move(cell));
    }
    nlohmann::json j;
    j["cells"] = std::move(cells);
    j["total_cells"] = report.size();
    j["cells_evaluated"] = report.cells_evaluated;
    j["max_depth"] = report.max_depth;
    j["wall_time_seconds"] = report.wall_time_seconds;
    j["initial_grid"] = report.initial_grid;
    j["depth_cap_hit"] = report.depth_cap_hit;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(1, '\t') << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<EnvelopePoint>& curve) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "cells,L\n";
    std::string line;
    for (const auto& point : curve) {
        line = std::to_string(point.cells);
        line += ',';
        format_double(line, point.lipschitz);
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_baseline_csv(const std::filesystem::path& path, const RoaBaseline& baseline) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const int d = static_cast<int>(baseline.initial_states.cols());
    std::string line;
    for (int k = 0; k < d; ++k) line += "x" + std::to_string(k + 1) + ",";
    line += "converged\n";
    out << line;
    for (long long r = 0; r < baseline.initial_states.rows(); ++r) {
        line.clear();
        for (int k = 0; k < d; ++k) {
            format_double(line, baseline.initial_states(r, k));
            line += ',';
        }
        line += baseline.converged[r] ? '1' : '0';
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::string utc_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["version"] = "0.1.0";
    j["config"] = nlohmann::json::parse(manifest.config_echo_json);
    j["started"] = manifest.started_utc;
    j["finished"] = manifest.finished_utc;
    j["workers"] = manifest.workers;
    j["outputs"] = manifest.outputs;

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << j.dump(1, '\t') << '\n';
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace gp3
