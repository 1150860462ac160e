#pragma once

#include "instascope/config.hpp"
#include "instascope/ela.hpp"
#include "instascope/optim.hpp"
#include "instascope/stats.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace instascope {

inline constexpr const char* kArtifactVersion = "instascope/1.0";

struct UnitFailure {
    std::string unit;
    std::string message;
};

// --- feature tables ------------------------------------------------------------

struct FeatureRow {
    ProblemId id;
    std::uint64_t doe_seed;
    FeatureVector features;
};

struct FeatureTable {
    std::vector<std::string> names;
    std::vector<FeatureRow> rows;  // sorted by (fid, iid, doe_seed)
    std::vector<UnitFailure> failures;
};

// Features for every (fid, iid, doe seed) of the config. Units are (fid, iid);
// with a cache directory, finished units are stored there and reused.
FeatureTable compute_feature_table(const ExperimentConfig& cfg,
                                   const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

// fid,iid,dim,doe_seed,<features>; missing values are empty cells.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
// fid,iid,dim,doe_seed,feature,reason for every missing value.
void write_missing_csv(std::ostream& out, const FeatureTable& table);

// Rounds to 10 significant digits so that floating-point noise in
// features which are constant in exact arithmetic does not register as a
// distributional difference.
double quantize(double value);

// One group per iid (1..iid_count): the quantized present values of the
// feature over all Doe seeds.
Groups feature_groups(const FeatureTable& table, int fid, int iid_count, const std::string& feature);

struct FeatureFamily {
    int fid;
    std::string feature;
    TestFamily family;
};

// Pairwise KS across instances per (fid, feature), BH within each family.
std::vector<FeatureFamily> feature_families(const FeatureTable& table, const ExperimentConfig& cfg);

// Rejected / valid tests; nullopt when no test could be run.
std::optional<double> rejection_rate(const TestFamily& family);

// --- heatmaps ------------------------------------------------------------------

struct Heatmap {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<std::optional<double>>> cells;

    // Appends a "mean" column and a "mean" row over present cells.
    Heatmap with_means() const;
    std::optional<double> at(const std::string& row, const std::string& col) const;
};

void write_heatmap_csv(std::ostream& out, const Heatmap& h, const std::string& corner);

// Functions x features of pairwise rejection rates.
Heatmap ela_dist_heatmap(const std::vector<FeatureFamily>& families, const std::vector<int>& fids,
                         const std::vector<std::string>& features);

// --- representativeness ----------------------------------------------------------

inline constexpr int kHighlightedInstances = 5;

struct ReprRow {
    int fid;
    int iid;
    std::optional<double> fraction;  // mean over features with a valid summary
    int features_used = 0;
    int features_missing = 0;
    bool first_five = false;
};

std::vector<ReprRow> representativeness(const std::vector<FeatureFamily>& families, const std::vector<int>& fids,
                                        int iid_count);

struct BoxStats {
    int fid;
    double min, q1, median, q3, max;
    double whisker_low, whisker_high;  // Tukey 1.5 IQR, clipped to the data
    double p99;
};

std::vector<BoxStats> repr_boxplots(const std::vector<ReprRow>& rows, const std::vector<int>& fids);

// For each of iids 1..5, the number of functions on which its fraction
// exceeds that function's 99th percentile.
std::vector<int> outlier_counts(const std::vector<ReprRow>& rows, const std::vector<BoxStats>& boxes);

// --- ecdf ----------------------------------------------------------------------------

struct EcdfCurve {
    int fid;
    std::string feature;
    std::string curve;  // "iid1".."iid5" or "rest"
    std::vector<EcdfPoint> points;
    std::optional<TestRecord> normality;
    std::string note;
};

std::vector<EcdfCurve> ecdf_curves(const FeatureTable& table, const ExperimentConfig& cfg);

// --- performance ---------------------------------------------------------------------

struct PerfCell {
    Algorithm algorithm;
    int fid;
    long long budget;
    TestFamily pairwise;
    TestFamily one_vs_all;
};

// Groups per iid of best precision at each report budget; MWU + BH.
std::vector<PerfCell> perf_analysis(const RunSet& runs, const ExperimentConfig& cfg);

Heatmap perf_heatmap(const std::vector<PerfCell>& cells, const ExperimentConfig& cfg, long long budget,
                     bool pairwise);

// Runs for the config's sweep; units are (algorithm, fid, iid) with all
// their runs, cached like feature units.
RunSet compute_runs(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

// algorithm,fid,iid,dim,run,budget,best_precision.
void write_runs_csv(std::ostream& out, const RunSet& runs);

// --- optima --------------------------------------------------------------------------

struct UniformityRow {
    int fid;
    int coordinate;  // 1-based
    std::size_t n;
    double statistic;
    double p_value;
    bool rejected;
    double min;
    double max;
};

// Per-coordinate KS of xopt against Uniform(-4, 4), one row per (fid, coordinate).
std::vector<UniformityRow> optima_uniformity(const std::vector<ProblemInstance>& instances, double alpha);

// --- average grid ----------------------------------------------------------------------

inline constexpr double kPrecisionFloor = 1e-16;

struct GridCell {
    double x1;
    double x2;
    double log10_mean_precision;
};

// log10 of the mean precision over instances 1..iid_count on a 2d lattice.
std::vector<GridCell> average_grid(int fid, int iid_count, int resolution, int workers = 1);

// --- orchestration ---------------------------------------------------------------------

// Writes the experiment's artifacts below cfg.output_dir. Returns 0, or 2
// when some units failed (listed in failed_units.csv).
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace instascope
