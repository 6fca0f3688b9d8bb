#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "gp.hpp"
#include "verify.hpp"

namespace gp3 {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training data CSV: header x1,...,xd,y; UTF-8, decimal points, no thousands
// separators. Ragged or non-numeric rows are errors.
TrainingSet read_training_csv(const std::filesystem::path& path);
void write_training_csv(const std::filesystem::path& path, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets);

// Cell export: columns c1..cd,b1..bd,lo,hi,L_mu,status. An empty index list
// with all_cells=true writes the whole report.
void write_cells_csv(const std::filesystem::path& path, const VerificationReport& report,
                     const std::vector<std::size_t>& indices, bool all_cells = false);

void write_report_json(const std::filesystem::path& path, const VerificationReport& report);

void write_curve_csv(const std::filesystem::path& path, const std::vector<EnvelopePoint>& curve);

void write_baseline_csv(const std::filesystem::path& path, const RoaBaseline& baseline);

// Run manifest written atomically (temp file + rename) at run end.
struct RunManifest {
    std::string command;
    std::string config_echo_json;  // serialized merged config
    std::string started_utc;
    std::string finished_utc;
    int workers = 0;
    std::vector<std::string> outputs;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

std::string utc_timestamp_now();

}  // namespace gp3
