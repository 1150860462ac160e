#include "instascope/optim.hpp"

#include "instascope/parallel.hpp"
#include "instascope/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace instascope {

namespace {

constexpr std::array<const char*, 5> kAlgorithmNames = {"RS", "OnePlusOneES", "DE", "PSO", "SPSA"};
constexpr std::uint64_t kRunStream = 0x72756e73ULL;

// Counts evaluations, tracks best-so-far precision and fills checkpoints
// as their budgets are reached.
class Harness {
public:
    Harness(const Objective& inst, long long budget, Algorithm a, std::uint64_t seed)
        : inst_(inst), budget_(budget), grid_(checkpoint_grid(budget)) {
        record_.algorithm = a;
        record_.instance = inst.id();
        record_.run_seed = seed;
    }

    bool exhausted() const { return record_.evaluations >= budget_; }
    long long remaining() const { return budget_ - record_.evaluations; }
    int dim() const { return inst_.dim(); }

    double operator()(std::span<const double> x) {
        if (exhausted()) {
            throw std::logic_error("harness: budget exceeded");
        }
        for (double v : x) {
            if (v < kDomainLower || v > kDomainUpper) {
                ++record_.out_of_box;
                break;
            }
        }
        const double f = inst_.evaluate(x);
        best_ = std::min(best_, f - inst_.fopt());
        ++record_.evaluations;
        while (next_ < grid_.size() && grid_[next_] == record_.evaluations) {
            record_.checkpoints.push_back({grid_[next_], std::max(best_, 0.0)});
            ++next_;
        }
        return f;
    }

    double operator()(const Vector& x) { return (*this)(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); }

    RunRecord& record() { return record_; }

    // Checkpoints not reached (an algorithm may stop short of the budget)
    // carry the final best value.
    RunRecord finish() {
        for (; next_ < grid_.size(); ++next_) {
            record_.checkpoints.push_back({grid_[next_], std::max(best_, 0.0)});
        }
        return std::move(record_);
    }

private:
    const Objective& inst_;
    long long budget_;
    std::vector<long long> grid_;
    std::size_t next_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
    RunRecord record_;
};

Vector uniform_point(Rng& rng, int dim) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) {
        x[i] = rng.uniform(kDomainLower, kDomainUpper);
    }
    return x;
}

double clamp_domain(double v) { return std::clamp(v, kDomainLower, kDomainUpper); }

void require_budget(long long budget, long long minimum, const char* name) {
    if (budget < minimum) {
        throw std::invalid_argument(std::string(name) + ": budget too small");
    }
}

}  // namespace

std::string to_string(Algorithm a) { return kAlgorithmNames.at(static_cast<std::size_t>(a)); }

Algorithm algorithm_from_string(const std::string& text) {
    const auto it = std::find(kAlgorithmNames.begin(), kAlgorithmNames.end(), text);
    if (it == kAlgorithmNames.end()) {
        throw std::invalid_argument("unknown algorithm: " + text);
    }
    return static_cast<Algorithm>(it - kAlgorithmNames.begin());
}

std::vector<long long> checkpoint_grid(long long budget) {
    if (budget < 1) {
        throw std::invalid_argument("checkpoint_grid: budget must be >= 1");
    }
    std::vector<long long> grid;
    for (long long power = 1; power <= budget; power *= 10) {
        for (long long m : {1LL, 2LL, 5LL}) {
            if (m * power < budget) {
                grid.push_back(m * power);
            }
        }
    }
    grid.push_back(budget);
    return grid;
}

RunRecord random_search(const Objective& inst, long long budget, std::uint64_t seed) {
    require_budget(budget, 1, "random_search");
    Harness h(inst, budget, Algorithm::RS, seed);
    Rng rng(seed);
    while (!h.exhausted()) {
        h(uniform_point(rng, inst.dim()));
    }
    return h.finish();
}

RunRecord one_plus_one_es(const Objective& inst, long long budget, std::uint64_t seed) {
    require_budget(budget, 2, "one_plus_one_es");
    Harness h(inst, budget, Algorithm::OnePlusOneES, seed);
    Rng rng(seed);
    const int d = inst.dim();
    Vector parent = uniform_point(rng, d);
    double f_parent = h(parent);
    double sigma = kEsInitialStep;
    auto& rec = h.record();
    rec.min_step = rec.max_step = sigma;
    int successes = 0;
    int in_window = 0;
    Vector child(d);
    while (!h.exhausted()) {
        for (int i = 0; i < d; ++i) {
            child[i] = clamp_domain(parent[i] + sigma * rng.normal());
        }
        const double f_child = h(child);
        ++rec.iterations;
        if (f_child <= f_parent) {
            parent = child;
            f_parent = f_child;
            ++successes;
        }
        if (++in_window == kEsWindow) {
            const double rate = static_cast<double>(successes) / kEsWindow;
            if (rate > 0.2) {
                sigma *= kEsFactor;
            } else if (rate < 0.2) {
                sigma /= kEsFactor;
            }
            sigma = std::clamp(sigma, kEsMinStep, kEsMaxStep);
            rec.min_step = std::min(rec.min_step, sigma);
            rec.max_step = std::max(rec.max_step, sigma);
            successes = 0;
            in_window = 0;
        }
    }
    return h.finish();
}

RunRecord differential_evolution(const Objective& inst, long long budget, std::uint64_t seed) {
    require_budget(budget, 1, "differential_evolution");
    Harness h(inst, budget, Algorithm::DE, seed);
    Rng rng(seed);
    const int d = inst.dim();
    const int np = std::max(4, kDePopulationPerDim * d);
    std::vector<Vector> pop;
    std::vector<double> fit;
    for (int i = 0; i < np && !h.exhausted(); ++i) {
        pop.push_back(uniform_point(rng, d));
        fit.push_back(h(pop.back()));
    }
    if (static_cast<int>(pop.size()) < np) {
        return h.finish();
    }
    auto reflect = [](double v) {
        if (v < kDomainLower) {
            v = kDomainLower + (kDomainLower - v);
        } else if (v > kDomainUpper) {
            v = kDomainUpper - (v - kDomainUpper);
        }
        return clamp_domain(v);
    };
    Vector trial(d);
    while (!h.exhausted()) {
        ++h.record().iterations;
        for (int i = 0; i < np && !h.exhausted(); ++i) {
            int r1;
            int r2;
            int r3;
            do {
                r1 = static_cast<int>(rng.below(static_cast<std::uint64_t>(np)));
            } while (r1 == i);
            do {
                r2 = static_cast<int>(rng.below(static_cast<std::uint64_t>(np)));
            } while (r2 == i || r2 == r1);
            do {
                r3 = static_cast<int>(rng.below(static_cast<std::uint64_t>(np)));
            } while (r3 == i || r3 == r1 || r3 == r2);
            const int jrand = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
            for (int j = 0; j < d; ++j) {
                if (j == jrand || rng.uniform() < kDeCr) {
                    trial[j] = reflect(pop[r1][j] + kDeF * (pop[r2][j] - pop[r3][j]));
                } else {
                    trial[j] = pop[i][j];
                }
            }
            const double f = h(trial);
            if (f <= fit[i]) {
                pop[i] = trial;
                fit[i] = f;
            }
        }
    }
    return h.finish();
}

RunRecord pso(const Objective& inst, long long budget, std::uint64_t seed) {
    require_budget(budget, 1, "pso");
    Harness h(inst, budget, Algorithm::PSO, seed);
    Rng rng(seed);
    const int d = inst.dim();
    std::vector<Vector> pos;
    std::vector<Vector> vel;
    std::vector<Vector> pbest;
    std::vector<double> pbest_f;
    Vector gbest;
    double gbest_f = std::numeric_limits<double>::infinity();
    auto& rec = h.record();
    for (int i = 0; i < kPsoSwarm && !h.exhausted(); ++i) {
        pos.push_back(uniform_point(rng, d));
        Vector v(d);
        for (int j = 0; j < d; ++j) {
            v[j] = rng.uniform(-kPsoMaxSpeed, kPsoMaxSpeed);
            rec.max_speed = std::max(rec.max_speed, std::abs(v[j]));
        }
        vel.push_back(v);
        const double f = h(pos.back());
        pbest.push_back(pos.back());
        pbest_f.push_back(f);
        if (f < gbest_f) {
            gbest_f = f;
            gbest = pos.back();
        }
    }
    const int swarm = static_cast<int>(pos.size());
    while (!h.exhausted()) {
        ++rec.iterations;
        for (int i = 0; i < swarm && !h.exhausted(); ++i) {
            for (int j = 0; j < d; ++j) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double v = kPsoInertia * vel[i][j] + kPsoAccel * r1 * (pbest[i][j] - pos[i][j]) +
                           kPsoAccel * r2 * (gbest[j] - pos[i][j]);
                v = std::clamp(v, -kPsoMaxSpeed, kPsoMaxSpeed);
                double x = pos[i][j] + v;
                if (x < kDomainLower || x > kDomainUpper) {
                    x = clamp_domain(x);
                    v = 0.0;
                }
                vel[i][j] = v;
                pos[i][j] = x;
                rec.max_speed = std::max(rec.max_speed, std::abs(v));
            }
            const double f = h(pos[i]);
            if (f < pbest_f[i]) {
                pbest_f[i] = f;
                pbest[i] = pos[i];
            }
            if (f < gbest_f) {
                gbest_f = f;
                gbest = pos[i];
            }
        }
    }
    return h.finish();
}

RunRecord spsa(const Objective& inst, long long budget, std::uint64_t seed) {
    require_budget(budget, 2, "spsa");
    Harness h(inst, budget, Algorithm::SPSA, seed);
    Rng rng(seed);
    const int d = inst.dim();
    const long long iterations = budget / 2;
    const double big_a = static_cast<double>(budget) / 20.0;
    Vector x = Vector::Zero(d);
    Vector delta(d);
    Vector plus(d);
    Vector minus(d);
    for (long long k = 0; k < iterations; ++k) {
        const double ak = kSpsaA / std::pow(static_cast<double>(k) + 1.0 + big_a, kSpsaAlpha);
        const double ck = kSpsaC / std::pow(static_cast<double>(k) + 1.0, kSpsaGamma);
        for (int i = 0; i < d; ++i) {
            delta[i] = rng.rademacher();
            plus[i] = clamp_domain(x[i] + ck * delta[i]);
            minus[i] = clamp_domain(x[i] - ck * delta[i]);
        }
        const double diff = h(plus) - h(minus);
        for (int i = 0; i < d; ++i) {
            x[i] = clamp_domain(x[i] - ak * diff / (2.0 * ck * delta[i]));
        }
        ++h.record().iterations;
    }
    return h.finish();
}

RunRecord run_algorithm(Algorithm a, const Objective& inst, long long budget, std::uint64_t seed) {
    switch (a) {
        case Algorithm::RS:
            return random_search(inst, budget, seed);
        case Algorithm::OnePlusOneES:
            return one_plus_one_es(inst, budget, seed);
        case Algorithm::DE:
            return differential_evolution(inst, budget, seed);
        case Algorithm::PSO:
            return pso(inst, budget, seed);
        case Algorithm::SPSA:
            return spsa(inst, budget, seed);
    }
    throw std::invalid_argument("run_algorithm: unknown algorithm");
}

Objective make_objective(const ProblemInstance& inst) {
    return Objective{inst.id(), inst.fopt(), [&inst](std::span<const double> x) { return inst.evaluate(x); }};
}

RunRecord random_search(const ProblemInstance& inst, long long budget, std::uint64_t seed) {
    return random_search(make_objective(inst), budget, seed);
}

RunRecord one_plus_one_es(const ProblemInstance& inst, long long budget, std::uint64_t seed) {
    return one_plus_one_es(make_objective(inst), budget, seed);
}

RunRecord differential_evolution(const ProblemInstance& inst, long long budget, std::uint64_t seed) {
    return differential_evolution(make_objective(inst), budget, seed);
}

RunRecord pso(const ProblemInstance& inst, long long budget, std::uint64_t seed) {
    return pso(make_objective(inst), budget, seed);
}

RunRecord spsa(const ProblemInstance& inst, long long budget, std::uint64_t seed) {
    return spsa(make_objective(inst), budget, seed);
}

RunRecord run_algorithm(Algorithm a, const ProblemInstance& inst, long long budget, std::uint64_t seed) {
    return run_algorithm(a, make_objective(inst), budget, seed);
}

std::uint64_t run_seed(std::uint64_t base_seed, Algorithm a, int fid, int iid, int run) {
    return mix_seed({kRunStream, base_seed, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(fid),
                     static_cast<std::uint64_t>(iid), static_cast<std::uint64_t>(run)});
}

RunSet run_experiment(std::span<const Algorithm> algorithms, std::span<const int> fids, int iid_count, int dim,
                      int runs, long long budget, std::uint64_t base_seed, int workers) {
    if (algorithms.empty() || fids.empty() || iid_count < 1 || runs < 1) {
        throw std::invalid_argument("run_experiment: empty sweep");
    }
    struct Unit {
        Algorithm a;
        int fid;
        int iid;
        int run;
    };
    std::vector<Unit> units;
    for (auto a : algorithms) {
        for (int fid : fids) {
            for (int iid = 1; iid <= iid_count; ++iid) {
                for (int r = 0; r < runs; ++r) {
                    units.push_back({a, fid, iid, r});
                }
            }
        }
    }
    std::sort(units.begin(), units.end(), [](const Unit& x, const Unit& y) {
        return std::tie(x.a, x.fid, x.iid, x.run) < std::tie(y.a, y.fid, y.iid, y.run);
    });

    // Instances are shared by every run on the same (fid, iid).
    std::map<std::pair<int, int>, std::size_t> instance_index;
    std::vector<ProblemId> ids;
    for (int fid : fids) {
        for (int iid = 1; iid <= iid_count; ++iid) {
            if (instance_index.emplace(std::pair(fid, iid), ids.size()).second) {
                ids.emplace_back(fid, iid, dim);
            }
        }
    }
    std::vector<std::optional<ProblemInstance>> instances(ids.size());
    std::vector<std::string> instance_errors(ids.size());
    parallel_for(ids.size(), workers, [&](std::size_t i) {
        try {
            instances[i] = create_instance(ids[i]);
        } catch (const std::exception& e) {
            instance_errors[i] = e.what();
        }
    });

    std::vector<std::optional<RunRecord>> results(units.size());
    std::vector<std::string> errors(units.size());
    parallel_for(units.size(), workers, [&](std::size_t i) {
        const auto& u = units[i];
        const auto idx = instance_index.at({u.fid, u.iid});
        if (!instances[idx]) {
            errors[i] = "instance creation failed: " + instance_errors[idx];
            return;
        }
        try {
            RunRecord r = run_algorithm(u.a, *instances[idx], budget, run_seed(base_seed, u.a, u.fid, u.iid, u.run));
            r.run = u.run;
            results[i] = std::move(r);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    RunSet out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (results[i]) {
            out.records.push_back(std::move(*results[i]));
        } else {
            const auto& u = units[i];
            out.failures.push_back({u.a, u.fid, u.iid, u.run, errors[i]});
        }
    }
    return out;
}

std::uint64_t planned_runs(std::uint64_t algorithms, std::uint64_t fids, std::uint64_t iids, std::uint64_t runs) {
    return algorithms * fids * iids * runs;
}

double precision_at(const RunRecord& r, long long budget) {
    const Checkpoint* best = nullptr;
    for (const auto& c : r.checkpoints) {
        if (c.budget <= budget) {
            best = &c;
        }
    }
    if (!best) {
        throw std::invalid_argument("precision_at: no checkpoint at or below budget");
    }
    return best->best_precision;
}

}  // namespace instascope
