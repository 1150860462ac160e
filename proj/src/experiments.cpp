#include "instascope/experiments.hpp"

#include "instascope/csv.hpp"
#include "instascope/doe.hpp"
#include "instascope/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace instascope {

namespace fs = std::filesystem;

namespace {

std::string iid_label(int iid) { return "iid" + std::to_string(iid); }

std::vector<int> sorted_fids(const ExperimentConfig& cfg) {
    std::vector<int> fids = cfg.fids;
    std::sort(fids.begin(), fids.end());
    return fids;
}

std::string feature_cache_key(const ExperimentConfig& cfg) {
    const auto text = fmt::format("dim={} doe_count={} doe_size={} offset={} catalogue={}", cfg.dim, cfg.doe_count,
                                  cfg.doe_size, cfg.doe_seed_offset, kCatalogueVersion);
    return fmt::format("features-{:016x}", fnv1a(text));
}

std::string run_cache_key(const ExperimentConfig& cfg) {
    const auto text = fmt::format("dim={} budget={} runs={} base_seed={}", cfg.dim, cfg.budget, cfg.runs, cfg.base_seed);
    return fmt::format("runs-{:016x}", fnv1a(text));
}

// --- feature unit cache: doe_seed,feature,value,reason ---

void store_feature_unit(const fs::path& file, const std::vector<FeatureRow>& rows) {
    std::ostringstream out;
    CsvWriter csv(out, {"doe_seed", "feature", "value", "reason"});
    for (const auto& row : rows) {
        for (const auto& e : row.features.entries()) {
            csv.cell(static_cast<unsigned long long>(row.doe_seed)).cell(e.name).cell(e.value);
            csv.cell(e.reason ? to_string(*e.reason) : std::string());
            csv.end_row();
        }
    }
    write_file_atomic(file, out.str());
}

std::vector<FeatureRow> load_feature_unit(const fs::path& file, const ProblemId& id) {
    const CsvTable t = read_csv(file);
    const auto c_seed = t.column("doe_seed");
    const auto c_name = t.column("feature");
    const auto c_value = t.column("value");
    const auto c_reason = t.column("reason");
    std::vector<FeatureRow> rows;
    for (const auto& r : t.rows) {
        const std::uint64_t seed = std::stoull(r[c_seed]);
        if (rows.empty() || rows.back().doe_seed != seed) {
            rows.push_back({id, seed, FeatureVector{}});
            rows.back().features.provenance.instance = id;
            rows.back().features.provenance.doe_seed = seed;
        }
        auto& fv = rows.back().features;
        if (!r[c_value].empty()) {
            fv.set(r[c_name], std::stod(r[c_value]));
        } else {
            fv.set_missing(r[c_name], missing_reason_from_string(r[c_reason]));
        }
    }
    return rows;
}

// --- run unit cache: run,run_seed,evaluations,budget,best_precision ---

void store_run_unit(const fs::path& file, const std::vector<RunRecord>& runs) {
    std::ostringstream out;
    CsvWriter csv(out, {"run", "run_seed", "evaluations", "budget", "best_precision"});
    for (const auto& r : runs) {
        for (const auto& c : r.checkpoints) {
            csv.cell(r.run).cell(static_cast<unsigned long long>(r.run_seed)).cell(r.evaluations);
            csv.cell(c.budget).cell(c.best_precision);
            csv.end_row();
        }
    }
    write_file_atomic(file, out.str());
}

std::vector<RunRecord> load_run_unit(const fs::path& file, Algorithm a, const ProblemId& id) {
    const CsvTable t = read_csv(file);
    const auto c_run = t.column("run");
    const auto c_seed = t.column("run_seed");
    const auto c_evals = t.column("evaluations");
    const auto c_budget = t.column("budget");
    const auto c_prec = t.column("best_precision");
    std::vector<RunRecord> runs;
    for (const auto& row : t.rows) {
        const int run = std::stoi(row[c_run]);
        if (runs.empty() || runs.back().run != run) {
            RunRecord r;
            r.algorithm = a;
            r.instance = id;
            r.run = run;
            r.run_seed = std::stoull(row[c_seed]);
            r.evaluations = std::stoll(row[c_evals]);
            runs.push_back(std::move(r));
        }
        runs.back().checkpoints.push_back({std::stoll(row[c_budget]), std::stod(row[c_prec])});
    }
    return runs;
}

}  // namespace

// --- feature tables --------------------------------------------------------------

FeatureTable compute_feature_table(const ExperimentConfig& cfg, const std::optional<fs::path>& cache_dir) {
    const auto seeds = cfg.doe_seeds();
    const auto fids = sorted_fids(cfg);
    std::vector<ProblemId> units;
    for (int fid : fids) {
        for (int iid = 1; iid <= cfg.iids; ++iid) {
            units.emplace_back(fid, iid, cfg.dim);
        }
    }
    if (cache_dir) {
        fs::create_directories(*cache_dir);
    }
    std::vector<std::vector<FeatureRow>> results(units.size());
    std::vector<std::string> errors(units.size());
    parallel_for(units.size(), cfg.workers, [&](std::size_t u) {
        const auto& id = units[u];
        const auto file = cache_dir ? std::optional(*cache_dir / fmt::format("f{}_i{}.csv", id.fid(), id.iid()))
                                    : std::nullopt;
        try {
            if (file && fs::exists(*file)) {
                results[u] = load_feature_unit(*file, id);
                if (results[u].size() == seeds.size()) {
                    return;
                }
                results[u].clear();
            }
            const auto inst = create_instance(id);
            std::vector<FeatureRow> rows;
            for (auto seed : seeds) {
                const Doe doe = build_doe(inst, cfg.doe_size, seed);
                rows.push_back({id, seed, compute_all(doe)});
            }
            if (file) {
                store_feature_unit(*file, rows);
            }
            results[u] = std::move(rows);
        } catch (const std::exception& e) {
            errors[u] = e.what();
            results[u].clear();
        }
    });

    FeatureTable table;
    table.names = feature_catalogue();
    for (std::size_t u = 0; u < units.size(); ++u) {
        if (!errors[u].empty()) {
            table.failures.push_back({to_string(units[u]), errors[u]});
            continue;
        }
        for (auto& row : results[u]) {
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
    std::vector<std::string> header{"fid", "iid", "dim", "doe_seed"};
    header.insert(header.end(), table.names.begin(), table.names.end());
    CsvWriter csv(out, header);
    for (const auto& row : table.rows) {
        csv.cell(row.id.fid()).cell(row.id.iid()).cell(row.id.dim()).cell(static_cast<unsigned long long>(row.doe_seed));
        for (const auto& name : table.names) {
            csv.cell(row.features.get(name));
        }
        csv.end_row();
    }
}

void write_missing_csv(std::ostream& out, const FeatureTable& table) {
    CsvWriter csv(out, {"fid", "iid", "dim", "doe_seed", "feature", "reason"});
    for (const auto& row : table.rows) {
        for (const auto& name : table.names) {
            const auto* e = row.features.find(name);
            if (e && e->value) {
                continue;
            }
            csv.cell(row.id.fid()).cell(row.id.iid()).cell(row.id.dim()).cell(static_cast<unsigned long long>(row.doe_seed));
            csv.cell(name).cell(e ? to_string(*e->reason) : to_string(MissingReason::Absent));
            csv.end_row();
        }
    }
}

double quantize(double value) {
    if (!std::isfinite(value) || value == 0.0) {
        return value;
    }
    return std::stod(fmt::format("{:.9e}", value));
}

Groups feature_groups(const FeatureTable& table, int fid, int iid_count, const std::string& feature) {
    Groups groups(static_cast<std::size_t>(iid_count));
    for (const auto& row : table.rows) {
        if (row.id.fid() != fid || row.id.iid() > iid_count) {
            continue;
        }
        if (const auto v = row.features.get(feature)) {
            groups[static_cast<std::size_t>(row.id.iid() - 1)].push_back(quantize(*v));
        }
    }
    return groups;
}

std::vector<FeatureFamily> feature_families(const FeatureTable& table, const ExperimentConfig& cfg) {
    const auto fids = sorted_fids(cfg);
    std::vector<FeatureFamily> families;
    for (int fid : fids) {
        for (const auto& name : table.names) {
            families.push_back({fid, name, TestFamily{}});
        }
    }
    parallel_for(families.size(), cfg.workers, [&](std::size_t i) {
        auto& f = families[i];
        f.family = pairwise_family(feature_groups(table, f.fid, cfg.iids, f.feature), TestMethod::KS, cfg.alpha);
    });
    return families;
}

std::optional<double> rejection_rate(const TestFamily& family) {
    if (family.valid() == 0) {
        return std::nullopt;
    }
    return static_cast<double>(family.rejections()) / static_cast<double>(family.valid());
}

// --- heatmaps --------------------------------------------------------------------

namespace {

std::optional<double> mean_present(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(n);
}

}  // namespace

Heatmap Heatmap::with_means() const {
    Heatmap h = *this;
    std::vector<std::optional<double>> all;
    for (auto& row : h.cells) {
        all.insert(all.end(), row.begin(), row.end());
        row.push_back(mean_present(row));
    }
    std::vector<std::optional<double>> mean_row;
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
        std::vector<std::optional<double>> column;
        for (const auto& row : cells) {
            column.push_back(row[c]);
        }
        mean_row.push_back(mean_present(column));
    }
    mean_row.push_back(mean_present(all));
    h.col_labels.push_back("mean");
    h.row_labels.push_back("mean");
    h.cells.push_back(std::move(mean_row));
    return h;
}

std::optional<double> Heatmap::at(const std::string& row, const std::string& col) const {
    const auto r = std::find(row_labels.begin(), row_labels.end(), row);
    const auto c = std::find(col_labels.begin(), col_labels.end(), col);
    if (r == row_labels.end() || c == col_labels.end()) {
        throw std::out_of_range("heatmap: no cell " + row + "/" + col);
    }
    return cells[static_cast<std::size_t>(r - row_labels.begin())][static_cast<std::size_t>(c - col_labels.begin())];
}

void write_heatmap_csv(std::ostream& out, const Heatmap& h, const std::string& corner) {
    std::vector<std::string> header{corner};
    header.insert(header.end(), h.col_labels.begin(), h.col_labels.end());
    CsvWriter csv(out, header);
    for (std::size_t r = 0; r < h.row_labels.size(); ++r) {
        csv.cell(h.row_labels[r]);
        for (const auto& v : h.cells[r]) {
            csv.cell(v);
        }
        csv.end_row();
    }
}

Heatmap ela_dist_heatmap(const std::vector<FeatureFamily>& families, const std::vector<int>& fids,
                         const std::vector<std::string>& features) {
    Heatmap h;
    h.col_labels = features;
    for (int fid : fids) {
        h.row_labels.push_back(std::to_string(fid));
        std::vector<std::optional<double>> row;
        for (const auto& name : features) {
            const auto it = std::find_if(families.begin(), families.end(),
                                         [&](const FeatureFamily& f) { return f.fid == fid && f.feature == name; });
            row.push_back(it == families.end() ? std::nullopt : rejection_rate(it->family));
        }
        h.cells.push_back(std::move(row));
    }
    return h;
}

// --- representativeness -----------------------------------------------------------

std::vector<ReprRow> representativeness(const std::vector<FeatureFamily>& families, const std::vector<int>& fids,
                                        int iid_count) {
    std::vector<ReprRow> rows;
    for (int fid : fids) {
        const auto n = static_cast<std::size_t>(iid_count);
        std::vector<double> sums(n, 0.0);
        std::vector<int> used(n, 0);
        std::vector<int> missing(n, 0);
        for (const auto& f : families) {
            if (f.fid != fid) {
                continue;
            }
            const auto summaries = one_vs_rest_from_family(f.family, n);
            for (std::size_t i = 0; i < n; ++i) {
                if (summaries[i]) {
                    sums[i] += summaries[i]->rate;
                    ++used[i];
                } else {
                    ++missing[i];
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            ReprRow r{fid, static_cast<int>(i) + 1, std::nullopt, used[i], missing[i], i < kHighlightedInstances};
            if (used[i] > 0) {
                r.fraction = sums[i] / used[i];
            }
            rows.push_back(r);
        }
    }
    return rows;
}

std::vector<BoxStats> repr_boxplots(const std::vector<ReprRow>& rows, const std::vector<int>& fids) {
    std::vector<BoxStats> out;
    for (int fid : fids) {
        std::vector<double> v;
        for (const auto& r : rows) {
            if (r.fid == fid && r.fraction) {
                v.push_back(*r.fraction);
            }
        }
        if (v.empty()) {
            continue;
        }
        std::sort(v.begin(), v.end());
        BoxStats b{fid, v.front(), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), v.back(), 0.0, 0.0,
                   quantile(v, 0.99)};
        const double iqr = b.q3 - b.q1;
        b.whisker_low = *std::lower_bound(v.begin(), v.end(), b.q1 - 1.5 * iqr);
        b.whisker_high = *(std::upper_bound(v.begin(), v.end(), b.q3 + 1.5 * iqr) - 1);
        out.push_back(b);
    }
    return out;
}

std::vector<int> outlier_counts(const std::vector<ReprRow>& rows, const std::vector<BoxStats>& boxes) {
    std::vector<int> counts(kHighlightedInstances, 0);
    for (const auto& b : boxes) {
        for (const auto& r : rows) {
            if (r.fid == b.fid && r.first_five && r.fraction && *r.fraction > b.p99) {
                ++counts[static_cast<std::size_t>(r.iid - 1)];
            }
        }
    }
    return counts;
}

// --- ecdf -------------------------------------------------------------------------------

std::vector<EcdfCurve> ecdf_curves(const FeatureTable& table, const ExperimentConfig& cfg) {
    std::vector<EcdfCurve> curves;
    for (int fid : sorted_fids(cfg)) {
        for (const auto& feature : cfg.ecdf_features) {
            const Groups groups = feature_groups(table, fid, cfg.iids, feature);
            std::vector<std::pair<std::string, std::vector<double>>> samples;
            std::vector<double> rest;
            for (std::size_t i = 0; i < groups.size(); ++i) {
                if (static_cast<int>(i) < kHighlightedInstances) {
                    samples.emplace_back(iid_label(static_cast<int>(i) + 1), groups[i]);
                } else {
                    rest.insert(rest.end(), groups[i].begin(), groups[i].end());
                }
            }
            if (!rest.empty()) {
                samples.emplace_back("rest", std::move(rest));
            }
            for (auto& [label, sample] : samples) {
                EcdfCurve c{fid, feature, label, {}, std::nullopt, {}};
                if (sample.empty()) {
                    c.note = "no_values";
                } else {
                    c.points = ecdf(sample);
                    try {
                        c.normality = normality_test(sample);
                        c.note = c.normality->note;
                    } catch (const std::invalid_argument& e) {
                        c.note = "insufficient_data";
                    }
                }
                curves.push_back(std::move(c));
            }
        }
    }
    return curves;
}

// --- performance --------------------------------------------------------------------------

std::vector<PerfCell> perf_analysis(const RunSet& runs, const ExperimentConfig& cfg) {
    std::map<std::pair<Algorithm, int>, std::vector<const RunRecord*>> by_cell;
    for (const auto& r : runs.records) {
        by_cell[{r.algorithm, r.instance.fid()}].push_back(&r);
    }
    std::vector<PerfCell> cells;
    for (const auto budget : cfg.report_budgets()) {
        for (const auto a : cfg.algorithms) {
            for (const int fid : sorted_fids(cfg)) {
                cells.push_back({a, fid, budget, {}, {}});
            }
        }
    }
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        auto& cell = cells[i];
        Groups groups(static_cast<std::size_t>(cfg.iids));
        const auto it = by_cell.find({cell.algorithm, cell.fid});
        if (it != by_cell.end()) {
            for (const auto* r : it->second) {
                if (r->instance.iid() <= cfg.iids) {
                    groups[static_cast<std::size_t>(r->instance.iid() - 1)].push_back(precision_at(*r, cell.budget));
                }
            }
        }
        cell.pairwise = pairwise_family(groups, TestMethod::MWU, cfg.alpha);
        cell.one_vs_all = one_vs_all_pooled(groups, TestMethod::MWU, cfg.alpha);
    });
    return cells;
}

Heatmap perf_heatmap(const std::vector<PerfCell>& cells, const ExperimentConfig& cfg, long long budget, bool pairwise) {
    Heatmap h;
    const auto fids = sorted_fids(cfg);
    for (int fid : fids) {
        h.col_labels.push_back(std::to_string(fid));
    }
    for (const auto a : cfg.algorithms) {
        h.row_labels.push_back(to_string(a));
        std::vector<std::optional<double>> row;
        for (int fid : fids) {
            const auto it = std::find_if(cells.begin(), cells.end(), [&](const PerfCell& c) {
                return c.algorithm == a && c.fid == fid && c.budget == budget;
            });
            row.push_back(it == cells.end() ? std::nullopt
                                            : rejection_rate(pairwise ? it->pairwise : it->one_vs_all));
        }
        h.cells.push_back(std::move(row));
    }
    return h;
}

RunSet compute_runs(const ExperimentConfig& cfg, const std::optional<fs::path>& cache_dir) {
    struct Unit {
        Algorithm a;
        int fid;
        int iid;
    };
    std::vector<Unit> units;
    auto algorithms = cfg.algorithms;
    std::sort(algorithms.begin(), algorithms.end());
    algorithms.erase(std::unique(algorithms.begin(), algorithms.end()), algorithms.end());
    for (auto a : algorithms) {
        for (int fid : sorted_fids(cfg)) {
            for (int iid = 1; iid <= cfg.iids; ++iid) {
                units.push_back({a, fid, iid});
            }
        }
    }
    if (cache_dir) {
        fs::create_directories(*cache_dir);
    }
    std::vector<std::vector<RunRecord>> results(units.size());
    std::vector<std::vector<RunFailure>> failures(units.size());
    parallel_for(units.size(), cfg.workers, [&](std::size_t u) {
        const auto& unit = units[u];
        const ProblemId id(unit.fid, unit.iid, cfg.dim);
        const auto file = cache_dir ? std::optional(*cache_dir / fmt::format("{}_f{}_i{}.csv", to_string(unit.a),
                                                                              unit.fid, unit.iid))
                                    : std::nullopt;
        if (file && fs::exists(*file)) {
            try {
                results[u] = load_run_unit(*file, unit.a, id);
                if (static_cast<int>(results[u].size()) == cfg.runs) {
                    return;
                }
            } catch (const std::exception&) {
            }
            results[u].clear();
        }
        std::optional<ProblemInstance> inst;
        try {
            inst = create_instance(id);
        } catch (const std::exception& e) {
            for (int r = 0; r < cfg.runs; ++r) {
                failures[u].push_back({unit.a, unit.fid, unit.iid, r, e.what()});
            }
            return;
        }
        for (int r = 0; r < cfg.runs; ++r) {
            try {
                RunRecord rec =
                    run_algorithm(unit.a, *inst, cfg.budget, run_seed(cfg.base_seed, unit.a, unit.fid, unit.iid, r));
                rec.run = r;
                results[u].push_back(std::move(rec));
            } catch (const std::exception& e) {
                failures[u].push_back({unit.a, unit.fid, unit.iid, r, e.what()});
            }
        }
        if (file && failures[u].empty()) {
            store_run_unit(*file, results[u]);
        }
    });
    RunSet out;
    for (std::size_t u = 0; u < units.size(); ++u) {
        for (auto& r : results[u]) {
            out.records.push_back(std::move(r));
        }
        out.failures.insert(out.failures.end(), failures[u].begin(), failures[u].end());
    }
    return out;
}

void write_runs_csv(std::ostream& out, const RunSet& runs) {
    CsvWriter csv(out, {"algorithm", "fid", "iid", "dim", "run", "budget", "best_precision"});
    for (const auto& r : runs.records) {
        for (const auto& c : r.checkpoints) {
            csv.cell(to_string(r.algorithm)).cell(r.instance.fid()).cell(r.instance.iid()).cell(r.instance.dim());
            csv.cell(r.run).cell(c.budget).cell(c.best_precision);
            csv.end_row();
        }
    }
}

// --- optima ------------------------------------------------------------------------------

std::vector<UniformityRow> optima_uniformity(const std::vector<ProblemInstance>& instances, double alpha) {
    std::vector<int> fids;
    for (const auto& inst : instances) {
        if (std::find(fids.begin(), fids.end(), inst.id().fid()) == fids.end()) {
            fids.push_back(inst.id().fid());
        }
    }
    const auto uniform_cdf = [](double x) { return std::clamp((x + 4.0) / 8.0, 0.0, 1.0); };
    std::vector<UniformityRow> rows;
    for (int fid : fids) {
        int dim = 0;
        for (const auto& inst : instances) {
            if (inst.id().fid() == fid) {
                dim = inst.dim();
                break;
            }
        }
        for (int j = 0; j < dim; ++j) {
            std::vector<double> coords;
            for (const auto& inst : instances) {
                if (inst.id().fid() == fid) {
                    coords.push_back(inst.xopt()[j]);
                }
            }
            const auto [mn, mx] = std::minmax_element(coords.begin(), coords.end());
            UniformityRow row{fid, j + 1, coords.size(), 0.0, 1.0, false, *mn, *mx};
            try {
                const auto rec = ks_one_sample(coords, uniform_cdf);
                row.statistic = rec.statistic;
                row.p_value = rec.p_value;
                row.rejected = rec.p_value < alpha;
            } catch (const std::invalid_argument&) {
                row.p_value = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// --- average grid ------------------------------------------------------------------------

std::vector<GridCell> average_grid(int fid, int iid_count, int resolution, int workers) {
    const Matrix grid = grid2d(resolution, kDomainLower, kDomainUpper);
    const auto points = static_cast<std::size_t>(grid.rows());
    std::vector<std::vector<double>> per_instance(static_cast<std::size_t>(iid_count));
    parallel_for(per_instance.size(), workers, [&](std::size_t i) {
        const auto inst = create_instance(ProblemId(fid, static_cast<int>(i) + 1, 2));
        auto& v = per_instance[i];
        v.resize(points);
        for (std::size_t p = 0; p < points; ++p) {
            const double x[2] = {grid(static_cast<Eigen::Index>(p), 0), grid(static_cast<Eigen::Index>(p), 1)};
            v[p] = inst.precision(x);
        }
    });
    std::vector<GridCell> cells(points);
    for (std::size_t p = 0; p < points; ++p) {
        double sum = 0.0;
        for (const auto& v : per_instance) {
            sum += v[p];
        }
        const double mean_precision = std::max(sum / static_cast<double>(iid_count), kPrecisionFloor);
        cells[p] = {grid(static_cast<Eigen::Index>(p), 0), grid(static_cast<Eigen::Index>(p), 1),
                    std::log10(mean_precision)};
    }
    return cells;
}

// --- orchestration -----------------------------------------------------------------------

namespace {

class ArtifactWriter {
public:
    ArtifactWriter(const ExperimentConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log), dir_(cfg.output_dir) {
        fs::create_directories(dir_);
    }

    const fs::path& dir() const { return dir_; }

    void emit(const std::string& name, const std::string& content) {
        const fs::path file = dir_ / name;
        write_file_atomic(file, content);
        const auto header_end = content.find('\n');
        std::vector<std::string> columns;
        std::stringstream header(content.substr(0, header_end));
        for (std::string col; std::getline(header, col, ',');) {
            columns.push_back(col);
        }
        nlohmann::ordered_json meta;
        meta["artifact"] = name;
        meta["artifact_version"] = kArtifactVersion;
        meta["catalogue_version"] = kCatalogueVersion;
        meta["config_hash"] = config_hash(cfg_);
        meta["experiment"] = to_string(cfg_.experiment);
        meta["profile"] = cfg_.profile;
        meta["columns"] = columns;
        write_file_atomic(fs::path(file.string() + ".meta.json"), meta.dump(2) + "\n");
        log_ << "wrote " << file.string() << "\n";
    }

    template <class Fn>
    void emit_with(const std::string& name, Fn&& fn) {
        std::ostringstream out;
        fn(out);
        emit(name, out.str());
    }

private:
    const ExperimentConfig& cfg_;
    std::ostream& log_;
    fs::path dir_;
};

int finish(ArtifactWriter& w, const std::vector<UnitFailure>& failures) {
    if (failures.empty()) {
        return 0;
    }
    w.emit_with("failed_units.csv", [&](std::ostream& out) {
        CsvWriter csv(out, {"unit", "message"});
        for (const auto& f : failures) {
            std::string msg = f.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            csv.cell(f.unit).cell(msg);
            csv.end_row();
        }
    });
    return 2;
}

FeatureTable features_for(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream& log) {
    const auto cache = w.dir() / "cache" / feature_cache_key(cfg);
    log << "computing features: " << cfg.fids.size() * static_cast<std::size_t>(cfg.iids) << " units, "
        << cfg.doe_count << " designs of " << cfg.doe_size << " points each\n";
    return compute_feature_table(cfg, cache);
}

int run_ela_dist(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream& log) {
    const FeatureTable table = features_for(cfg, w, log);
    w.emit_with("features.csv", [&](std::ostream& out) { write_feature_csv(out, table); });
    w.emit_with("features_missing.csv", [&](std::ostream& out) { write_missing_csv(out, table); });
    if (table.rows.size() >= 2) {
        std::vector<FeatureVector> vectors;
        for (const auto& r : table.rows) {
            vectors.push_back(r.features);
        }
        const auto report = drop_degenerate(vectors);
        w.emit_with("feature_degeneracy.csv", [&](std::ostream& out) {
            CsvWriter csv(out, {"feature", "dropped"});
            for (const auto& name : table.names) {
                const bool dropped =
                    std::find(report.dropped.begin(), report.dropped.end(), name) != report.dropped.end();
                csv.cell(name).cell(dropped);
                csv.end_row();
            }
        });
    }
    const auto families = feature_families(table, cfg);
    const auto heatmap = ela_dist_heatmap(families, sorted_fids(cfg), table.names).with_means();
    w.emit_with("ela_dist_heatmap.csv", [&](std::ostream& out) { write_heatmap_csv(out, heatmap, "fid"); });
    if (cfg.export_tests) {
        std::vector<std::string> labels;
        for (int i = 1; i <= cfg.iids; ++i) {
            labels.push_back(iid_label(i));
        }
        std::vector<std::pair<std::string, const TestFamily*>> list;
        for (const auto& f : families) {
            list.emplace_back(fmt::format("f{}:{}", f.fid, f.feature), &f.family);
        }
        w.emit_with("ela_dist_tests.csv", [&](std::ostream& out) { write_test_family_csv(out, list, labels); });
    }
    return finish(w, table.failures);
}

int run_repr(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream& log) {
    const FeatureTable table = features_for(cfg, w, log);
    const auto fids = sorted_fids(cfg);
    const auto rows = representativeness(feature_families(table, cfg), fids, cfg.iids);
    const auto boxes = repr_boxplots(rows, fids);
    w.emit_with("repr_instances.csv", [&](std::ostream& out) {
        CsvWriter csv(out, {"fid", "iid", "mean_rejection_fraction", "is_first_five", "features_used",
                            "features_missing"});
        for (const auto& r : rows) {
            csv.cell(r.fid).cell(r.iid).cell(r.fraction).cell(r.first_five).cell(r.features_used).cell(r.features_missing);
            csv.end_row();
        }
    });
    w.emit_with("repr_boxplot.csv", [&](std::ostream& out) {
        CsvWriter csv(out, {"fid", "min", "q1", "median", "q3", "max", "whisker_low", "whisker_high", "p99"});
        for (const auto& b : boxes) {
            csv.cell(b.fid).cell(b.min).cell(b.q1).cell(b.median).cell(b.q3).cell(b.max);
            csv.cell(b.whisker_low).cell(b.whisker_high).cell(b.p99);
            csv.end_row();
        }
    });
    return finish(w, table.failures);
}

int run_ecdf(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream& log) {
    const FeatureTable table = features_for(cfg, w, log);
    for (const auto& feature : cfg.ecdf_features) {
        if (std::find(table.names.begin(), table.names.end(), feature) == table.names.end()) {
            throw ConfigError("unknown feature: " + feature);
        }
    }
    const auto curves = ecdf_curves(table, cfg);
    w.emit_with("ecdf.csv", [&](std::ostream& out) {
        CsvWriter csv(out, {"fid", "feature", "curve", "value", "fraction"});
        for (const auto& c : curves) {
            for (const auto& p : c.points) {
                csv.cell(c.fid).cell(c.feature).cell(c.curve).cell(p.value).cell(p.fraction);
                csv.end_row();
            }
        }
    });
    w.emit_with("ecdf_normality.csv", [&](std::ostream& out) {
        CsvWriter csv(out, {"fid", "feature", "curve", "n", "statistic", "p_value", "normal", "note"});
        for (const auto& c : curves) {
            csv.cell(c.fid).cell(c.feature).cell(c.curve);
            if (c.normality) {
                csv.cell(static_cast<unsigned long long>(c.normality->n1)).cell(c.normality->statistic);
                csv.cell(c.normality->p_value).cell(c.normality->p_value >= cfg.alpha);
            } else {
                csv.cell("").cell("").cell("").cell("");
            }
            csv.cell(c.note);
            csv.end_row();
        }
    });
    w.emit_with("ecdf_ks.csv", [&](std::ostream& out) {
        CsvWriter csv(out, {"fid", "feature", "pairs", "valid", "rejections", "rate"});
        for (int fid : sorted_fids(cfg)) {
            for (const auto& feature : cfg.ecdf_features) {
                const auto family =
                    pairwise_family(feature_groups(table, fid, cfg.iids, feature), TestMethod::KS, cfg.alpha);
                csv.cell(fid).cell(feature).cell(static_cast<unsigned long long>(family.tests.size()));
                csv.cell(static_cast<unsigned long long>(family.valid()));
                csv.cell(static_cast<unsigned long long>(family.rejections())).cell(rejection_rate(family));
                csv.end_row();
            }
        }
    });
    return finish(w, table.failures);
}

int run_perf(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream& log) {
    log << "running optimizers: "
        << planned_runs(cfg.algorithms.size(), cfg.fids.size(), static_cast<std::uint64_t>(cfg.iids),
                        static_cast<std::uint64_t>(cfg.runs))
        << " runs of budget " << cfg.budget << "\n";
    const RunSet runs = compute_runs(cfg, w.dir() / "cache" / run_cache_key(cfg));
    w.emit_with("runs.csv", [&](std::ostream& out) { write_runs_csv(out, runs); });
    const auto cells = perf_analysis(runs, cfg);
    for (const auto budget : cfg.report_budgets()) {
        const auto pairwise = perf_heatmap(cells, cfg, budget, true).with_means();
        const auto ova = perf_heatmap(cells, cfg, budget, false).with_means();
        w.emit_with(fmt::format("perf_pairwise_b{}.csv", budget),
                    [&](std::ostream& out) { write_heatmap_csv(out, pairwise, "algorithm"); });
        w.emit_with(fmt::format("perf_one_vs_all_b{}.csv", budget),
                    [&](std::ostream& out) { write_heatmap_csv(out, ova, "algorithm"); });
    }
    std::vector<UnitFailure> failures;
    for (const auto& f : runs.failures) {
        failures.push_back({fmt::format("{}/f{}/i{}/r{}", to_string(f.algorithm), f.fid, f.iid, f.run), f.message});
    }
    return finish(w, failures);
}

int run_optima(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream&) {
    std::vector<ProblemId> ids;
    for (int fid : sorted_fids(cfg)) {
        for (int iid = 1; iid <= cfg.iids; ++iid) {
            ids.emplace_back(fid, iid, cfg.dim);
        }
    }
    std::vector<std::optional<ProblemInstance>> made(ids.size());
    parallel_for(ids.size(), cfg.workers, [&](std::size_t i) { made[i] = create_instance(ids[i]); });
    std::vector<ProblemInstance> instances;
    for (auto& m : made) {
        instances.push_back(std::move(*m));
    }
    w.emit_with("optima_manifest.csv", [&](std::ostream& out) { write_manifest(out, instances); });
    const auto rows = optima_uniformity(instances, cfg.alpha);
    w.emit_with("optima_uniformity.csv", [&](std::ostream& out) {
        CsvWriter csv(out, {"fid", "coordinate", "n", "ks_statistic", "p_value", "rejected", "min", "max",
                            "special_optimum"});
        for (const auto& r : rows) {
            csv.cell(r.fid).cell(r.coordinate).cell(static_cast<unsigned long long>(r.n)).cell(r.statistic);
            csv.cell(r.p_value).cell(r.rejected).cell(r.min).cell(r.max).cell(has_special_optimum(r.fid));
            csv.end_row();
        }
    });
    return 0;
}

int run_avggrid(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream& log) {
    std::vector<UnitFailure> failures;
    std::ostringstream out;
    CsvWriter csv(out, {"fid", "x1", "x2", "log10_mean_precision"});
    for (int fid : sorted_fids(cfg)) {
        log << "averaging grid for f" << fid << "\n";
        try {
            for (const auto& c : average_grid(fid, cfg.iids, cfg.grid_resolution, cfg.workers)) {
                csv.cell(fid).cell(c.x1).cell(c.x2).cell(c.log10_mean_precision);
                csv.end_row();
            }
        } catch (const std::exception& e) {
            failures.push_back({fmt::format("f{}", fid), e.what()});
        }
    }
    w.emit("avggrid.csv", out.str());
    return finish(w, failures);
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    validate(cfg);
    ArtifactWriter w(cfg, log);
    write_file_atomic(w.dir() / "config.txt", describe(cfg));
    switch (cfg.experiment) {
        case Experiment::ElaDist:
            return run_ela_dist(cfg, w, log);
        case Experiment::Repr:
            return run_repr(cfg, w, log);
        case Experiment::Ecdf:
            return run_ecdf(cfg, w, log);
        case Experiment::Perf:
            return run_perf(cfg, w, log);
        case Experiment::Optima:
            return run_optima(cfg, w, log);
        case Experiment::Avggrid:
            return run_avggrid(cfg, w, log);
    }
    return 1;
}

}  // namespace instascope
