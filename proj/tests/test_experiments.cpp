#include "instascope/config.hpp"
#include "instascope/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace instascope;
namespace fs = std::filesystem;

namespace {

CommandLine parse(std::vector<std::string> args) {
    args.insert(args.begin(), "instascope");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return parse_command_line(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("instascope_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TestFamily family_with(std::size_t groups, const std::vector<std::pair<std::size_t, std::size_t>>& rejected) {
    TestFamily f;
    for (std::size_t i = 0; i < groups; ++i) {
        for (std::size_t j = i + 1; j < groups; ++j) {
            PairTest t;
            t.first = i;
            t.second = j;
            t.record = TestRecord{};
            t.rejected = std::find(rejected.begin(), rejected.end(), std::make_pair(i, j)) != rejected.end();
            f.tests.push_back(t);
        }
    }
    return f;
}

}  // namespace

TEST_CASE("paper defaults and desk profile") {
    const auto ela = paper_defaults(Experiment::ElaDist);
    CHECK(ela.fids.size() == 24);
    CHECK(ela.iids == 500);
    CHECK(ela.doe_count == 100);
    CHECK(ela.doe_size == 1000);
    CHECK(ela.dim == 5);
    CHECK(paper_defaults(Experiment::Avggrid).dim == 2);
    auto desk = paper_defaults(Experiment::Perf);
    apply_profile(desk, "desk");
    CHECK(desk.iids == 50);
    CHECK(desk.runs == 30);
    CHECK(desk.budget == 1000);
    CHECK_THROWS_AS(apply_profile(desk, "huge"), ConfigError);
    CHECK(desk.report_budgets() == std::vector<long long>{1000});
    CHECK(ela.doe_seeds().front() == 1);
    CHECK(ela.doe_seeds().size() == 100);
}

TEST_CASE("validation") {
    auto cfg = paper_defaults(Experiment::ElaDist);
    CHECK_NOTHROW(validate(cfg));
    cfg.iids = 1;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = paper_defaults(Experiment::Avggrid);
    cfg.dim = 3;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = paper_defaults(Experiment::ElaDist);
    cfg.fids = {25};
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("config hash ignores workers and output directory") {
    auto a = paper_defaults(Experiment::Perf);
    auto b = a;
    b.workers = 8;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.base_seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("command line precedence") {
    const auto dir = scratch("cli");
    const auto file = dir / "run.toml";
    std::ofstream(file) << "iids = 20\nruns = 7\nbudget = 500\n";

    const auto plain = parse({"perf", "--profile", "desk"});
    REQUIRE(plain.config);
    CHECK(plain.config->iids == 50);

    const auto from_file = parse({"perf", "--profile", "desk", "--config", file.string()});
    REQUIRE(from_file.config);
    CHECK(from_file.config->iids == 20);
    CHECK(from_file.config->runs == 7);
    CHECK(from_file.config->fids == std::vector<int>{1, 2, 3, 5, 8, 12, 17, 21});

    const auto flags = parse({"perf", "--profile", "desk", "--config", file.string(), "--runs", "9", "--fids", "1,4"});
    REQUIRE(flags.config);
    CHECK(flags.config->iids == 20);
    CHECK(flags.config->runs == 9);
    CHECK(flags.config->fids == std::vector<int>{1, 4});

    const auto algs = parse({"perf", "--algorithms", "RS,SPSA"});
    REQUIRE(algs.config);
    CHECK(algs.config->algorithms == std::vector<Algorithm>{Algorithm::RS, Algorithm::SPSA});

    std::ofstream(dir / "bad.toml") << "iids = 20\nfrobnicate = 3\n";
    const auto bad = parse({"perf", "--config", (dir / "bad.toml").string()});
    CHECK_FALSE(bad.config);
    CHECK(bad.exit_code == 1);

    CHECK(parse({"perf", "--iids", "1"}).exit_code == 1);
    CHECK(parse({"nonsense"}).exit_code == 1);
    const auto help = parse({"--help"});
    CHECK_FALSE(help.config);
    CHECK(help.exit_code == 0);
}

TEST_CASE("heatmap means") {
    Heatmap h{{"1", "2"}, {"a", "b"}, {{0.2, 0.4}, {std::nullopt, 0.8}}};
    const auto m = h.with_means();
    CHECK(*m.at("1", "mean") == doctest::Approx(0.3));
    CHECK(*m.at("2", "mean") == doctest::Approx(0.8));
    CHECK(*m.at("mean", "a") == doctest::Approx(0.2));
    CHECK(*m.at("mean", "b") == doctest::Approx(0.6));
    CHECK_FALSE(m.at("2", "a").has_value());
    std::ostringstream out;
    write_heatmap_csv(out, h, "fid");
    CHECK(out.str().substr(0, 10) == "fid,a,b\n1,");
}

TEST_CASE("representativeness from synthetic families") {
    // iid 1 differs from every other instance on feature x; nothing differs on y.
    const std::size_t g = 6;
    std::vector<std::pair<std::size_t, std::size_t>> against_first;
    for (std::size_t j = 1; j < g; ++j) {
        against_first.emplace_back(0, j);
    }
    std::vector<FeatureFamily> families{{1, "x", family_with(g, against_first)}, {1, "y", family_with(g, {})}};
    const auto rows = representativeness(families, {1}, static_cast<int>(g));
    REQUIRE(rows.size() == g);
    CHECK(*rows[0].fraction == doctest::Approx(0.5));
    CHECK(rows[0].first_five);
    CHECK_FALSE(rows[5].first_five);
    CHECK(*rows[1].fraction == doctest::Approx(0.1));
    CHECK(rows[1].features_used == 2);
    const auto boxes = repr_boxplots(rows, {1});
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].max == doctest::Approx(0.5));
    CHECK(boxes[0].median == doctest::Approx(0.1));
    const auto counts = outlier_counts(rows, boxes);
    CHECK(counts.size() == kHighlightedInstances);
    CHECK(counts[0] == 1);
    CHECK(counts[1] == 0);
}

TEST_CASE("average grid of a single sphere instance") {
    const auto inst = create_instance(ProblemId(1, 1, 2));
    const auto cells = average_grid(1, 1, 11);
    REQUIRE(cells.size() == 121);
    for (const auto& c : cells) {
        const double d1 = c.x1 - inst.xopt()[0];
        const double d2 = c.x2 - inst.xopt()[1];
        const double expected = std::log10(std::max(d1 * d1 + d2 * d2, kPrecisionFloor));
        CHECK(c.log10_mean_precision == doctest::Approx(expected).epsilon(1e-9));
    }
    CHECK(cells[1].x1 > cells[0].x1);
    CHECK(cells[1].x2 == cells[0].x2);
}

TEST_CASE("optima uniformity") {
    std::vector<ProblemInstance> instances;
    for (int iid = 1; iid <= 200; ++iid) {
        instances.push_back(create_instance(ProblemId(1, iid, 2)));
    }
    const auto rows = optima_uniformity(instances, 0.01);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.n == 200);
        CHECK(r.min >= -4.0);
        CHECK(r.max <= 4.0);
        CHECK(r.p_value > 0.01);
    }
}

TEST_CASE("quantize") {
    CHECK(quantize(1.0000000000001) == 1.0);
    CHECK(quantize(0.1234567890123) == 0.123456789);
    CHECK(quantize(-2.5) == -2.5);
}

TEST_CASE("experiments are deterministic and resumable") {
    const auto dir = scratch("run");
    auto cfg = paper_defaults(Experiment::ElaDist);
    cfg.fids = {1, 5};
    cfg.iids = 4;
    cfg.doe_count = 5;
    cfg.doe_size = 100;
    cfg.output_dir = (dir / "a").string();
    std::ostringstream log;
    REQUIRE(run_experiment(cfg, log) == 0);
    const auto first = slurp(dir / "a" / "features.csv");
    const auto heat = slurp(dir / "a" / "ela_dist_heatmap.csv");
    CHECK(fs::exists(dir / "a" / "features.csv.meta.json"));
    CHECK(fs::exists(dir / "a" / "config.txt"));

    // rerun reuses the cache and reproduces every artifact byte for byte
    REQUIRE(run_experiment(cfg, log) == 0);
    CHECK(slurp(dir / "a" / "features.csv") == first);

    cfg.output_dir = (dir / "b").string();
    cfg.workers = 2;
    REQUIRE(run_experiment(cfg, log) == 0);
    CHECK(slurp(dir / "b" / "features.csv") == first);
    CHECK(slurp(dir / "b" / "ela_dist_heatmap.csv") == heat);

    auto perf = paper_defaults(Experiment::Perf);
    perf.fids = {1};
    perf.iids = 3;
    perf.runs = 4;
    perf.budget = 100;
    perf.budgets = {10, 100};
    perf.algorithms = {Algorithm::RS, Algorithm::DE};
    perf.output_dir = (dir / "perf").string();
    REQUIRE(run_experiment(perf, log) == 0);
    CHECK(fs::exists(dir / "perf" / "runs.csv"));
    CHECK(fs::exists(dir / "perf" / "perf_pairwise_b10.csv"));
    CHECK(fs::exists(dir / "perf" / "perf_one_vs_all_b100.csv"));
}
