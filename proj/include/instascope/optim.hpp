#pragma once

#include "instascope/suite.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace instascope {

enum class Algorithm { RS, OnePlusOneES, DE, PSO, SPSA };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::RS, Algorithm::OnePlusOneES, Algorithm::DE, Algorithm::PSO,
                                               Algorithm::SPSA};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& text);

struct Checkpoint {
    long long budget;
    double best_precision;
};

struct RunRecord {
    Algorithm algorithm = Algorithm::RS;
    ProblemId instance{1, 1, 2};
    int run = 0;
    std::uint64_t run_seed = 0;
    std::vector<Checkpoint> checkpoints;

    // Diagnostics.
    long long evaluations = 0;
    long long out_of_box = 0;        // evaluated points outside the domain
    double min_step = 0.0;           // ES sigma range, 0 otherwise
    double max_step = 0.0;
    double max_speed = 0.0;          // PSO largest velocity component
    long long iterations = 0;        // SPSA / ES iterations, DE generations
};

// {1, 2, 5} x 10^k up to budget, plus budget itself.
std::vector<long long> checkpoint_grid(long long budget);

inline constexpr double kEsInitialStep = 2.0;
inline constexpr double kEsMinStep = 1e-12;
inline constexpr double kEsMaxStep = 10.0;
inline constexpr double kEsFactor = 1.5;
inline constexpr int kEsWindow = 10;

inline constexpr double kDeF = 0.5;
inline constexpr double kDeCr = 0.9;
inline constexpr int kDePopulationPerDim = 10;

inline constexpr int kPsoSwarm = 40;
inline constexpr double kPsoInertia = 0.729;
inline constexpr double kPsoAccel = 1.49445;
inline constexpr double kPsoMaxSpeed = 0.5 * (kDomainUpper - kDomainLower);

inline constexpr double kSpsaA = 0.2;
inline constexpr double kSpsaC = 0.1;
inline constexpr double kSpsaAlpha = 0.602;
inline constexpr double kSpsaGamma = 0.101;

// Black-box view of a minimization problem. Lets the optimizers run on
// functions built outside the suite.
struct Objective {
    ProblemId problem;
    double optimum = 0.0;
    std::function<double(std::span<const double>)> function;

    const ProblemId& id() const { return problem; }
    int dim() const { return problem.dim(); }
    double fopt() const { return optimum; }
    double evaluate(std::span<const double> x) const { return function(x); }
};

// The instance must outlive the returned objective.
Objective make_objective(const ProblemInstance& inst);

RunRecord random_search(const Objective& obj, long long budget, std::uint64_t seed);
RunRecord one_plus_one_es(const Objective& obj, long long budget, std::uint64_t seed);
RunRecord differential_evolution(const Objective& obj, long long budget, std::uint64_t seed);
RunRecord pso(const Objective& obj, long long budget, std::uint64_t seed);
RunRecord spsa(const Objective& obj, long long budget, std::uint64_t seed);
RunRecord run_algorithm(Algorithm a, const Objective& obj, long long budget, std::uint64_t seed);

RunRecord random_search(const ProblemInstance& inst, long long budget, std::uint64_t seed);
RunRecord one_plus_one_es(const ProblemInstance& inst, long long budget, std::uint64_t seed);
RunRecord differential_evolution(const ProblemInstance& inst, long long budget, std::uint64_t seed);
RunRecord pso(const ProblemInstance& inst, long long budget, std::uint64_t seed);
RunRecord spsa(const ProblemInstance& inst, long long budget, std::uint64_t seed);

RunRecord run_algorithm(Algorithm a, const ProblemInstance& inst, long long budget, std::uint64_t seed);

std::uint64_t run_seed(std::uint64_t base_seed, Algorithm a, int fid, int iid, int run);

struct RunFailure {
    Algorithm algorithm;
    int fid;
    int iid;
    int run;
    std::string message;
};

struct RunSet {
    std::vector<RunRecord> records;  // sorted by (algorithm, fid, iid, run)
    std::vector<RunFailure> failures;
};

// Full cross-product algorithms x fids x iids(1..iid_count) x runs.
RunSet run_experiment(std::span<const Algorithm> algorithms, std::span<const int> fids, int iid_count, int dim,
                      int runs, long long budget, std::uint64_t base_seed, int workers = 1);

// Number of records a sweep would produce, without running it.
std::uint64_t planned_runs(std::uint64_t algorithms, std::uint64_t fids, std::uint64_t iids, std::uint64_t runs);

// Best precision recorded at the largest checkpoint <= budget.
double precision_at(const RunRecord& r, long long budget);

}  // namespace instascope
