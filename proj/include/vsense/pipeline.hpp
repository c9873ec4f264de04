#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vsense/attack.hpp"
#include "vsense/report.hpp"
#include "vsense/train.hpp"

namespace vsense {

// Fully resolved run configuration. Echoed into every output directory so a
// run can be reproduced from its artifacts alone.
struct RunConfig {
    std::uint64_t seed = 0;
    int k = 32;
    int n_train = 20000;
    int n_test = 1000;
    double y_min = 0.05;
    PerturbationSpec spec;
    TrainConfig train_cfg;
    AttackConfig attack;
    int noise_draws = 1000;
    double verify_tol = 1e-6;
    std::int64_t node_limit = 1000000;
    int jobs = 0;
    bool verbose = true;
};

// Config echo in the same key=value format the CLI accepts via --config.
std::string config_echo(const RunConfig& cfg, const std::string& section);
void write_config_echo(const RunConfig& cfg, const std::string& section,
                       const std::filesystem::path& out_dir);

inline constexpr std::array<TrainMode, 4> kPipelineModes = {
    TrainMode::Standard, TrainMode::Noise, TrainMode::Robust, TrainMode::Targeted};

struct PipelineResult {
    std::filesystem::path out_dir;
    std::vector<EvalTable> tables;            // one per mode, pipeline order
    std::vector<std::filesystem::path> model_paths;
    std::filesystem::path report_md, report_csv;
};

// End-to-end run: synthesizes train/test data, trains all four modes from the
// same seed, attacks and verifies the test set (dual and MILP) per model, and
// emits the combined report, scatter and series files. Deterministic for a
// fixed config; byte-identical outputs across runs.
PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace vsense
