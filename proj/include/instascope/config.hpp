#pragma once

#include "instascope/optim.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace instascope {

enum class Experiment { ElaDist, Repr, Ecdf, Perf, Optima, Avggrid };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& text);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::ElaDist;
    std::vector<int> fids;
    int iids = 500;
    int dim = 5;
    int doe_count = 100;
    int doe_size = 1000;
    std::uint64_t doe_seed_offset = 0;  // Doe seeds are offset + 1 .. offset + doe_count
    int runs = 50;
    long long budget = 10000;
    std::vector<long long> budgets{1000, 10000};  // reported fixed budgets (perf)
    std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
    double alpha = 0.01;
    std::uint64_t base_seed = 1;
    std::string output_dir = "out";
    int workers = 1;
    int grid_resolution = 101;
    std::vector<std::string> ecdf_features{"ela_meta.lin_simple.intercept", "ela_distr.skewness"};
    bool export_tests = false;
    std::string profile = "paper";

    std::vector<std::uint64_t> doe_seeds() const;
    // Budgets at which perf results are reported: those <= budget, plus budget.
    std::vector<long long> report_budgets() const;
};

// Defaults mirroring the full-scale study for the given experiment.
ExperimentConfig paper_defaults(Experiment e);

// "paper" leaves the defaults untouched; "desk" shrinks every axis.
void apply_profile(ExperimentConfig& cfg, const std::string& profile);

// Throws ConfigError.
void validate(const ExperimentConfig& cfg);

// Hash over every field that affects results (not workers or output_dir).
std::string config_hash(const ExperimentConfig& cfg);

std::string describe(const ExperimentConfig& cfg);

struct CommandLine {
    std::optional<ExperimentConfig> config;
    int exit_code = 0;      // meaningful when config is empty
    std::string message;    // help text or error
};

// instascope <experiment> [--config FILE] [--profile desk|paper] [flags].
// Precedence: paper defaults < profile < config file < flags.
CommandLine parse_command_line(int argc, const char* const* argv);

}  // namespace instascope
