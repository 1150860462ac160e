#include "instascope/config.hpp"

#include "instascope/csv.hpp"
#include "instascope/suite.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

namespace instascope {

namespace {

constexpr std::array<const char*, 6> kExperimentNames = {"ela-dist", "repr", "ecdf", "perf", "optima", "avggrid"};

const std::vector<int> kDeskFids{1, 2, 3, 5, 8, 12, 17, 21};

bool two_dimensional(Experiment e) {
    return e == Experiment::Optima || e == Experiment::Avggrid || e == Experiment::Perf;
}

}  // namespace

std::string to_string(Experiment e) { return kExperimentNames.at(static_cast<std::size_t>(e)); }

Experiment experiment_from_string(const std::string& text) {
    const auto it = std::find(kExperimentNames.begin(), kExperimentNames.end(), text);
    if (it == kExperimentNames.end()) {
        throw ConfigError("unknown experiment: " + text);
    }
    return static_cast<Experiment>(it - kExperimentNames.begin());
}

std::vector<std::uint64_t> ExperimentConfig::doe_seeds() const {
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(doe_count, 0)));
    std::iota(seeds.begin(), seeds.end(), doe_seed_offset + 1);
    return seeds;
}

std::vector<long long> ExperimentConfig::report_budgets() const {
    std::set<long long> out;
    for (long long b : budgets) {
        if (b <= budget) {
            out.insert(b);
        }
    }
    out.insert(budget);
    return {out.begin(), out.end()};
}

ExperimentConfig paper_defaults(Experiment e) {
    ExperimentConfig cfg;
    cfg.experiment = e;
    cfg.fids.resize(kFunctionCount);
    std::iota(cfg.fids.begin(), cfg.fids.end(), 1);
    cfg.dim = two_dimensional(e) && e != Experiment::Perf ? 2 : 5;
    return cfg;
}

void apply_profile(ExperimentConfig& cfg, const std::string& profile) {
    if (profile == "paper") {
        cfg.profile = profile;
        return;
    }
    if (profile != "desk") {
        throw ConfigError("unknown profile: " + profile);
    }
    cfg.profile = profile;
    cfg.iids = 50;
    cfg.doe_count = 30;
    cfg.doe_size = 250;
    cfg.runs = 30;
    cfg.budget = 1000;
    cfg.fids = kDeskFids;
    cfg.dim = two_dimensional(cfg.experiment) ? 2 : 5;
}

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (cfg.fids.empty()) {
        fail("fids must not be empty");
    }
    for (int fid : cfg.fids) {
        if (fid < 1 || fid > kFunctionCount) {
            fail(fmt::format("fid {} outside [1, {}]", fid, kFunctionCount));
        }
    }
    if (std::set<int>(cfg.fids.begin(), cfg.fids.end()).size() != cfg.fids.size()) {
        fail("fids must be distinct");
    }
    if (cfg.iids < 2) {
        fail("iids must be >= 2");
    }
    if (cfg.dim < 2) {
        fail("dim must be >= 2");
    }
    if (cfg.experiment == Experiment::Avggrid && cfg.dim != 2) {
        fail("avggrid requires dim = 2");
    }
    if (cfg.doe_count < 1 || cfg.doe_size < 10) {
        fail("doe_count must be >= 1 and doe_size >= 10");
    }
    if (cfg.runs < 1 || cfg.budget < 2) {
        fail("runs must be >= 1 and budget >= 2");
    }
    if (cfg.algorithms.empty()) {
        fail("algorithms must not be empty");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        fail("alpha must lie in (0, 1)");
    }
    if (cfg.workers < 1) {
        fail("workers must be >= 1");
    }
    if (cfg.grid_resolution < 2) {
        fail("grid_resolution must be >= 2");
    }
    if (cfg.output_dir.empty()) {
        fail("output_dir must not be empty");
    }
}

std::string describe(const ExperimentConfig& cfg) {
    std::vector<std::string> algs;
    for (auto a : cfg.algorithms) {
        algs.push_back(to_string(a));
    }
    return fmt::format(
        "experiment={}\nprofile={}\nfids={}\niids={}\ndim={}\ndoe_count={}\ndoe_size={}\ndoe_seed_offset={}\n"
        "runs={}\nbudget={}\nbudgets={}\nalgorithms={}\nalpha={}\nbase_seed={}\ngrid_resolution={}\n"
        "ecdf_features={}\nexport_tests={}\n",
        to_string(cfg.experiment), cfg.profile, fmt::join(cfg.fids, ","), cfg.iids, cfg.dim, cfg.doe_count,
        cfg.doe_size, cfg.doe_seed_offset, cfg.runs, cfg.budget, fmt::join(cfg.budgets, ","), fmt::join(algs, ","),
        format_double(cfg.alpha), cfg.base_seed, cfg.grid_resolution, fmt::join(cfg.ecdf_features, ","),
        cfg.export_tests);
}

std::string config_hash(const ExperimentConfig& cfg) {
    return fmt::format("{:016x}", fnv1a(describe(cfg)));
}

CommandLine parse_command_line(int argc, const char* const* argv) {
    CLI::App app{"Instance-variance analysis for the BBOB suite", "instascope"};
    app.allow_config_extras(false);

    std::string experiment;
    std::string profile;
    std::vector<int> fids;
    int iids = 0;
    int dim = 0;
    int doe_count = 0;
    int doe_size = 0;
    std::uint64_t doe_seed_offset = 0;
    int runs = 0;
    long long budget = 0;
    std::vector<long long> budgets;
    std::vector<std::string> algorithms;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    int workers = 0;
    int resolution = 0;
    std::vector<std::string> features;
    bool export_tests = false;

    app.add_option("experiment", experiment, "ela-dist | repr | ecdf | perf | optima | avggrid")->required();
    app.set_config("--config", "", "Flat key = value configuration file");
    auto* o_profile = app.add_option("--profile", profile, "desk | paper");
    auto* o_fids = app.add_option("--fids", fids, "Function ids")->delimiter(',');
    auto* o_iids = app.add_option("--iids", iids, "Number of instances (1..N)");
    auto* o_dim = app.add_option("--dim", dim, "Dimension");
    auto* o_doe_count = app.add_option("--doe_count,--doe-count", doe_count, "Designs per instance");
    auto* o_doe_size = app.add_option("--doe_size,--doe-size", doe_size, "Points per design");
    auto* o_offset = app.add_option("--doe_seed_offset,--doe-seed-offset", doe_seed_offset, "Design seeds start at offset+1");
    auto* o_runs = app.add_option("--runs", runs, "Optimizer runs per instance");
    auto* o_budget = app.add_option("--budget", budget, "Evaluation budget per run");
    auto* o_budgets = app.add_option("--budgets", budgets, "Reported fixed budgets")->delimiter(',');
    auto* o_algs = app.add_option("--algorithms", algorithms, "RS,OnePlusOneES,DE,PSO,SPSA")->delimiter(',');
    auto* o_alpha = app.add_option("--alpha", alpha, "Significance level");
    auto* o_seed = app.add_option("--seed,--base_seed", seed, "Base seed for optimizer runs");
    auto* o_out = app.add_option("--out,--output_dir", out, "Output directory");
    auto* o_workers = app.add_option("--workers", workers, "Worker threads");
    auto* o_res = app.add_option("--grid_resolution,--resolution", resolution, "avggrid lattice resolution");
    auto* o_features = app.add_option("--ecdf_features,--features", features, "Features for ecdf")->delimiter(',');
    auto* o_export = app.add_flag("--export_tests,--export-tests", export_tests, "Write per-test CSV for ela-dist");

    CommandLine result;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        result.exit_code = 0;
        result.message = app.help();
        return result;
    } catch (const CLI::ParseError& e) {
        result.exit_code = 1;
        result.message = e.what();
        return result;
    }

    try {
        const Experiment e = experiment_from_string(experiment);
        ExperimentConfig cfg = paper_defaults(e);
        apply_profile(cfg, o_profile->count() > 0 ? profile : "paper");
        auto given = [](const CLI::Option* o) { return o->count() > 0; };
        if (given(o_fids)) cfg.fids = fids;
        if (given(o_iids)) cfg.iids = iids;
        if (given(o_dim)) cfg.dim = dim;
        if (given(o_doe_count)) cfg.doe_count = doe_count;
        if (given(o_doe_size)) cfg.doe_size = doe_size;
        if (given(o_offset)) cfg.doe_seed_offset = doe_seed_offset;
        if (given(o_runs)) cfg.runs = runs;
        if (given(o_budget)) cfg.budget = budget;
        if (given(o_budgets)) cfg.budgets = budgets;
        if (given(o_algs)) {
            cfg.algorithms.clear();
            for (const auto& a : algorithms) {
                try {
                    cfg.algorithms.push_back(algorithm_from_string(a));
                } catch (const std::invalid_argument& err) {
                    throw ConfigError(err.what());
                }
            }
        }
        if (given(o_alpha)) cfg.alpha = alpha;
        if (given(o_seed)) cfg.base_seed = seed;
        if (given(o_out)) cfg.output_dir = out;
        if (given(o_workers)) cfg.workers = workers;
        if (given(o_res)) cfg.grid_resolution = resolution;
        if (given(o_features)) cfg.ecdf_features = features;
        if (given(o_export)) cfg.export_tests = export_tests;
        validate(cfg);
        result.config = std::move(cfg);
    } catch (const ConfigError& err) {
        result.exit_code = 1;
        result.message = err.what();
    }
    return result;
}

}  // namespace instascope
