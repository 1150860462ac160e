#include "instascope/ela.hpp"
#include "instascope/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace instascope;

namespace {

Doe synthetic(const Matrix& x, const Vector& y, std::uint64_t seed = 1) {
    Doe d;
    d.x = x;
    d.y = y;
    d.seed = seed;
    return d;
}

Doe noise_doe(int n, int dim, std::uint64_t seed) {
    Rng rng(seed * 7919 + 1);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = rng.normal();
    }
    return synthetic(lhs_sample(n, dim, seed, -5, 5), y, seed);
}

Doe line_doe(const std::vector<double>& positions, const std::vector<double>& values) {
    const auto n = static_cast<Eigen::Index>(positions.size());
    Matrix x(n, 1);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = positions[static_cast<std::size_t>(i)];
        y[i] = values[static_cast<std::size_t>(i)];
    }
    return synthetic(x, y);
}

bool no_nan(const FeatureVector& fv) {
    for (const auto& e : fv.entries()) {
        if (e.value && !std::isfinite(*e.value)) {
            return false;
        }
        if (!e.value && !e.reason) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("catalogue") {
    const auto& cat = feature_catalogue();
    CHECK(cat.size() == 54);
    CHECK(std::set<std::string>(cat.begin(), cat.end()).size() == cat.size());
    CHECK(level_names(kDefaultLevelQuantiles).front() == "ela_level.mmce_lda_10");
    CHECK(disp_names(kDefaultDispQuantiles).back() == "disp.diff_median_25");
    CHECK(missing_reason_from_string(to_string(MissingReason::DegenerateFold)) == MissingReason::DegenerateFold);
}

TEST_CASE("feature vector stores non-finite values as missing") {
    FeatureVector fv;
    fv.set("a", 1.0);
    fv.set("b", NAN);
    fv.set("c", std::nullopt, MissingReason::ZeroVariance);
    CHECK(fv.size() == 3);
    CHECK(fv.present_count() == 1);
    CHECK(fv.find("b")->reason == MissingReason::NonFinite);
    CHECK(fv.find("c")->reason == MissingReason::ZeroVariance);
    CHECK_FALSE(fv.get("zzz").has_value());
}

TEST_CASE("y distribution") {
    Matrix x = lhs_sample(10, 1, 1, 0, 1);
    Vector sym(10);
    sym << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    CHECK(std::abs(*ela_distr(synthetic(x, sym)).get("ela_distr.skewness")) < 1e-12);
    Vector two(10);
    two << 0, 1, 0, 1, 0, 1, 0, 1, 0, 1;
    CHECK(*ela_distr(synthetic(x, two)).get("ela_distr.kurtosis") == doctest::Approx(-2.0).epsilon(1e-12));
    const auto flat = ela_distr(synthetic(x, Vector::Constant(10, 3.0)));
    CHECK(flat.find("ela_distr.skewness")->reason == MissingReason::ZeroVariance);
    const auto gauss = ela_distr(noise_doe(500, 2, 4));
    CHECK(*gauss.get("ela_distr.number_of_peaks") == 1.0);
}

TEST_CASE("meta-model") {
    const Matrix x = lhs_sample(50, 2, 3, -5, 5);
    const Vector y = (2.0 + 3.0 * x.col(0).array()).matrix();
    const auto lin = ela_meta(synthetic(x, y));
    CHECK(*lin.get("ela_meta.lin_simple.intercept") == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(*lin.get("ela_meta.lin_simple.adj_r2") == doctest::Approx(1.0).epsilon(1e-12));
    const auto flat = ela_meta(synthetic(x, Vector::Constant(50, 1.0)));
    CHECK(flat.find("ela_meta.lin_simple.adj_r2")->reason == MissingReason::ZeroVariance);
    CHECK(flat.find("ela_meta.quad_w_interact.adj_r2")->reason == MissingReason::ZeroVariance);

    const auto sphere = create_instance(ProblemId(1, 2, 5));
    const auto fv = ela_meta(build_doe(sphere, 250, 1));
    CHECK(std::abs(*fv.get("ela_meta.quad_simple.adj_r2") - 1.0) < 1e-6);
    CHECK(std::abs(*fv.get("ela_meta.quad_simple.cond") - 1.0) < 1e-6);
}

TEST_CASE("level sets") {
    std::vector<double> pos;
    for (int i = 0; i < 200; ++i) {
        pos.push_back(-5.0 + 10.0 * (i + 0.5) / 200.0);
    }
    const auto sep = ela_level(line_doe(pos, pos));
    CHECK(*sep.get("ela_level.mmce_lda_50") < 0.02);

    double total = 0.0;
    for (std::uint64_t t = 1; t <= 100; ++t) {
        total += *ela_level(noise_doe(100, 2, t)).get("ela_level.mmce_lda_50");
    }
    CHECK(total / 100.0 == doctest::Approx(0.5).epsilon(0.2));

    int qda_better = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto fv = ela_level(build_doe(create_instance(ProblemId(1, 1, 2)), 250, seed));
        qda_better += *fv.get("ela_level.mmce_qda_25") < *fv.get("ela_level.mmce_lda_25") ? 1 : 0;
    }
    CHECK(qda_better > 15);
}

TEST_CASE("pca") {
    const Matrix x = lhs_sample(1000, 2, 5, -5, 5);
    Vector y = Vector::Constant(1000, 4.0);
    const auto fv = pca_features(synthetic(x, y));
    CHECK(*fv.get("pca.expl_var_PC1.cov_x") == doctest::Approx(0.5).epsilon(0.1));
    CHECK(*fv.get("pca.expl_var_PC1.cov_init") == doctest::Approx(*fv.get("pca.expl_var_PC1.cov_x")).epsilon(1e-12));
    CHECK(fv.find("pca.expl_var.cor_init")->reason == MissingReason::ZeroVariance);

    const auto a = pca_features(build_doe(create_instance(ProblemId(1, 1, 3)), 100, 2));
    const auto b = pca_features(build_doe(create_instance(ProblemId(1, 2, 3)), 100, 2));
    for (const char* name : {"pca.expl_var.cov_x", "pca.expl_var.cor_x", "pca.expl_var_PC1.cov_x", "pca.expl_var_PC1.cor_x"}) {
        CHECK(a.get(name) == b.get(name));
    }
}

TEST_CASE("nearest-better clustering") {
    // gaps 1..9 along a line, y increasing: nn = (1,1,2,...,9), nb = (9,1,2,...,9)
    const std::vector<double> pos{0, 1, 3, 6, 10, 15, 21, 28, 36, 45};
    const auto fv = nbc_features(line_doe(pos, pos));
    CHECK(*fv.get("nbc.nn_nb.mean_ratio") == doctest::Approx(23.0 / 27.0).epsilon(1e-14));

    const auto flat = nbc_features(line_doe(pos, std::vector<double>(10, 1.0)));
    for (const auto& e : flat.entries()) {
        CHECK(e.reason == MissingReason::NoBetterNeighbor);
    }

    Doe d = noise_doe(200, 3, 9);
    const auto base = nbc_features(d);
    d.y *= 4.5;
    const auto scaled = nbc_features(d);
    for (const auto& e : base.entries()) {
        CHECK(scaled.get(e.name) == e.value);
    }
}

TEST_CASE("dispersion") {
    double total = 0.0;
    for (std::uint64_t t = 1; t <= 100; ++t) {
        total += *disp_features(noise_doe(250, 3, t)).get("disp.ratio_mean_10");
    }
    CHECK(total / 100.0 == doctest::Approx(1.0).epsilon(0.1));
    const auto inst = create_instance(ProblemId(1, 3, 5));
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        CHECK(*disp_features(build_doe(inst, 250, seed)).get("disp.ratio_mean_05") < 1.0);
    }
    const double full[] = {1.0};
    const auto self = disp_features(noise_doe(50, 2, 1), full);
    CHECK(*self.get("disp.ratio_mean_100") == 1.0);
    CHECK(*self.get("disp.ratio_median_100") == 1.0);
    CHECK(*self.get("disp.diff_mean_100") == 0.0);
    CHECK(*self.get("disp.diff_median_100") == 0.0);
    const double tiny[] = {0.01};
    CHECK(disp_features(noise_doe(50, 2, 1), tiny).find("disp.ratio_mean_01")->reason == MissingReason::InsufficientData);
}

TEST_CASE("information content") {
    std::vector<double> pos;
    std::vector<double> alternating;
    for (int i = 0; i < 20; ++i) {
        pos.push_back(i);
        alternating.push_back(i % 2);
    }
    const auto alt = ic_features(line_doe(pos, alternating));
    CHECK(*alt.get("ic.m0") == 1.0);
    const auto mono = ic_features(line_doe(pos, pos));
    CHECK(*mono.get("ic.m0") == 0.0);
    const auto flat = ic_features(line_doe(pos, std::vector<double>(20, 2.0)));
    CHECK(*flat.get("ic.h_max") == 0.0);
    CHECK(flat.find("ic.eps_max")->reason == MissingReason::ZeroVariance);
    const auto noisy = ic_features(noise_doe(200, 2, 3));
    CHECK(*noisy.get("ic.h_max") > 0.0);
    CHECK(*noisy.get("ic.h_max") <= 1.0);
}

TEST_CASE("compute_all") {
    const auto f1 = create_instance(ProblemId(1, 1, 5));
    const Doe doe = build_doe(f1, 1000, 1);
    const auto a = compute_all(doe);
    const auto b = compute_all(doe);
    CHECK(a.size() == feature_catalogue().size());
    CHECK(a.present_count() >= 40);
    CHECK(no_nan(a));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.entries()[i].name == feature_catalogue()[i]);
        CHECK(a.entries()[i].value == b.entries()[i].value);
    }
    CHECK(a.provenance.group_seconds.size() == 7);

    const auto f2 = compute_all(build_doe(create_instance(ProblemId(2, 1, 5)), 1000, 1));
    CHECK(a.get("pca.expl_var_PC1.cov_x") == f2.get("pca.expl_var_PC1.cov_x"));
    CHECK(a.get("pca.expl_var.cor_x") == f2.get("pca.expl_var.cor_x"));
    CHECK(a.get("ela_meta.lin_simple.intercept") != f2.get("ela_meta.lin_simple.intercept"));

    Doe tiny = build_doe(f1, 12, 1);
    const auto partial = compute_all(tiny);
    CHECK(partial.find("ela_level.mmce_lda_10")->reason == MissingReason::GroupFailure);
    CHECK(partial.size() == feature_catalogue().size());
}

TEST_CASE("rank invariance of nbc and level-set features") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Doe d = build_doe(create_instance(ProblemId(3, 2, 3)), 200, seed);
        const auto nbc = nbc_features(d);
        const auto lvl = ela_level(d);
        d.y = (2.0 * d.y.array() + 7.0).matrix();
        const auto nbc2 = nbc_features(d);
        const auto lvl2 = ela_level(d);
        for (const auto& e : nbc.entries()) {
            CHECK(nbc2.get(e.name) == e.value);
        }
        for (const auto& e : lvl.entries()) {
            CHECK(lvl2.get(e.name) == e.value);
        }
    }
}

TEST_CASE("drop_degenerate") {
    std::vector<FeatureVector> rows(3);
    for (int i = 0; i < 3; ++i) {
        rows[static_cast<std::size_t>(i)].set("const", 3.7);
        rows[static_cast<std::size_t>(i)].set("varies", i == 1 ? 2.0 : 1.0);
        rows[static_cast<std::size_t>(i)].set_missing("gone", MissingReason::ZeroVariance);
    }
    const auto r = drop_degenerate(rows);
    CHECK(r.kept == std::vector<std::string>{"varies"});
    CHECK(r.dropped == std::vector<std::string>{"const", "gone"});
    CHECK_THROWS(drop_degenerate(std::vector<FeatureVector>(1)));
}
