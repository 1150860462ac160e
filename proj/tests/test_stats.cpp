#include "instascope/rng.hpp"
#include "instascope/stats.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace instascope;

namespace {

std::vector<double> draws(Rng& rng, std::size_t n, double shift = 0.0) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.normal() + shift;
    }
    return v;
}

}  // namespace

TEST_CASE("descriptive helpers") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(mean(v) == 2.5);
    CHECK(quantile(v, 0.5) == 2.5);
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(midranks(std::vector<double>{3, 1, 3}) == std::vector<double>{2.5, 1.0, 2.5});
    CHECK_FALSE(pearson(std::vector<double>{1, 1, 1}, std::span<const double>(v).subspan(0, 3)).has_value());
}

TEST_CASE("ks examples") {
    const std::vector<double> same{1, 2, 3, 4, 5};
    const auto r = ks_two_sample(same, same);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(ks_two_sample(std::vector<double>{0, 0, 0, 0}, std::vector<double>{1, 1, 1, 1}).statistic == 1.0);
    CHECK(ks_two_sample(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 3, 4, 5}).statistic == 0.25);
    CHECK_THROWS_AS(ks_two_sample(std::vector<double>{1, 2}, same), std::invalid_argument);
    CHECK_THROWS_AS(ks_two_sample(std::vector<double>{1, 2, 3, NAN}, same), std::invalid_argument);
}

TEST_CASE("kolmogorov survival") {
    CHECK(kolmogorov_survival(0.0) == 1.0);
    // reference values of the limiting distribution
    CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-12));
    CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.049485876755377876).epsilon(1e-12));
    double previous = 1.0;
    for (int i = 1; i <= 400; ++i) {
        const double s = kolmogorov_survival(i / 100.0);
        CHECK(s <= previous);
        CHECK(s >= 0.0);
        previous = s;
    }
}

TEST_CASE("ks statistic is invariant under increasing transforms") {
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        auto a = draws(rng, 15);
        auto b = draws(rng, 12, 0.5);
        const double d = ks_two_sample(a, b).statistic;
        for (auto* s : {&a, &b}) {
            for (auto& x : *s) {
                x = std::exp(x) * 3.0 + 1.0;
            }
        }
        CHECK(ks_two_sample(a, b).statistic == d);
    }
}

TEST_CASE("mwu examples") {
    const auto r = mann_whitney_u(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 0.1);
    CHECK(r.note == "exact");
    const auto s = mann_whitney_u(std::vector<double>{1, 3, 5, 7}, std::vector<double>{2, 4, 6, 8});
    CHECK(s.statistic == 6.0);
    CHECK(s.p_value == 24.0 / 35.0);
    const auto tied = mann_whitney_u(std::vector<double>{2, 2, 2}, std::vector<double>{2, 2, 2, 2});
    CHECK(tied.p_value == 1.0);
    CHECK(tied.statistic == 6.0);
    CHECK(tied.note == "all_tied");
    Rng rng(8);
    const auto a = draws(rng, 40);
    CHECK(mann_whitney_u(a, a).p_value > 0.99);
    CHECK_THROWS_AS(mann_whitney_u(std::vector<double>{1, 2}, a), std::invalid_argument);
}

TEST_CASE("mwu symmetry U_a + U_b = n1 n2") {
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> a(3 + rng.below(30));
        std::vector<double> b(3 + rng.below(30));
        for (auto& x : a) {
            x = std::round(rng.normal() * 3.0);
        }
        for (auto& x : b) {
            x = std::round(rng.normal() * 3.0);
        }
        const auto ab = mann_whitney_u(a, b);
        const auto ba = mann_whitney_u(b, a);
        CHECK(ab.statistic + ba.statistic == static_cast<double>(a.size() * b.size()));
        CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
        CHECK(ab.statistic >= 0.0);
        CHECK(ab.statistic <= static_cast<double>(a.size() * b.size()));
    }
}

TEST_CASE("statistical oracles on small random cases") {
    Rng rng(2024);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n1 = 3 + rng.below(4);
        const std::size_t n2 = 3 + rng.below(12 - n1 - 2);
        std::vector<double> a(n1);
        std::vector<double> b(n2);
        for (auto& x : a) {
            x = std::round(rng.normal() * 2.0);
        }
        for (auto& x : b) {
            x = std::round(rng.normal() * 2.0 + 0.5);
        }
        const auto r = mann_whitney_u(a, b);
        CHECK(r.statistic == oracle::mwu_u(a, b));
        if (r.note == "exact") {
            CHECK(r.p_value == oracle::mwu_exact_p(a, b));
        }
        if (n1 >= kMinKsSample && n2 >= kMinKsSample) {
            CHECK(std::abs(ks_two_sample(a, b).statistic - oracle::ks_statistic(a, b)) <= 1e-12);
        }
        std::vector<double> p(1 + rng.below(30));
        for (auto& x : p) {
            x = rng.uniform() < 0.3 ? rng.uniform() * 0.01 : rng.uniform();
        }
        CHECK(benjamini_hochberg(p, 0.05).rejected == oracle::bh_rejections(p, 0.05));
    }
}

TEST_CASE("benjamini-hochberg") {
    CHECK(benjamini_hochberg(std::vector<double>{1, 1, 1}, 0.01).rejected == std::vector<bool>{false, false, false});
    CHECK(benjamini_hochberg(std::vector<double>{0.01, 0.02, 0.03, 0.04}, 0.05).rejected ==
          std::vector<bool>{true, true, true, true});
    CHECK(benjamini_hochberg(std::vector<double>{0.005}, 0.01).rejected == std::vector<bool>{true});
    const auto empty = benjamini_hochberg(std::vector<double>{}, 0.01);
    CHECK(empty.rejected.empty());
    CHECK(empty.adjusted.empty());
    const auto adj = benjamini_hochberg(std::vector<double>{0.04, 0.01, 0.03}, 0.05).adjusted;
    CHECK(adj[0] == doctest::Approx(0.04));
    CHECK(adj[1] == doctest::Approx(0.03));
    CHECK(adj[2] == doctest::Approx(0.04));
}

TEST_CASE("bh monotone in alpha and a superset of bonferroni") {
    Rng rng(12);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> p(20);
        for (auto& x : p) {
            x = std::pow(rng.uniform(), 3.0);
        }
        const auto loose = benjamini_hochberg(p, 0.05).rejected;
        const auto tight = benjamini_hochberg(p, 0.01).rejected;
        const auto bonf = bonferroni(p, 0.05);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK((!tight[i] || loose[i]));
            CHECK((!bonf[i] || loose[i]));
        }
    }
}

TEST_CASE("pairwise families") {
    CHECK(pair_count(500) == 124750);
    CHECK(pair_count(2) == 1);
    Groups disjoint{{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {11, 12, 13, 14, 15, 16, 17, 18, 19, 20}};
    CHECK(pairwise_rejection_rate(disjoint, TestMethod::KS, 0.01).rate == 1.0);
    Groups with_bad{{1, 2, 3, 4, 5}, {1, 2}, {2, 3, 4, 5, 6}};
    const auto fam = pairwise_family(with_bad, TestMethod::KS, 0.01);
    CHECK(fam.tests.size() == 3);
    CHECK(fam.failed == 2);
    CHECK(fam.valid() == 1);
    Groups all_bad{{1}, {2}};
    CHECK_THROWS_AS(pairwise_rejection_rate(all_bad, TestMethod::KS, 0.01), std::domain_error);
}

TEST_CASE("pairwise rejection rate is calibrated under the null") {
    Rng rng(99);
    for (int rep = 0; rep < 20; ++rep) {
        Groups g;
        for (int i = 0; i < 20; ++i) {
            g.push_back(draws(rng, 30));
        }
        CHECK(pairwise_rejection_rate(g, TestMethod::KS, 0.01).rate <= 0.05);
    }
}

TEST_CASE("one-vs-rest fractions") {
    Rng rng(5);
    Groups same;
    const auto base = draws(rng, 30);
    for (int i = 0; i < 3; ++i) {
        same.push_back(base);
    }
    for (const auto& s : one_vs_rest_rejection(same, TestMethod::KS, 0.01)) {
        REQUIRE(s.has_value());
        CHECK(s->rate == 0.0);
        CHECK(s->denominator == 2);
    }
    Groups shifted;
    for (int i = 0; i < 10; ++i) {
        shifted.push_back(draws(rng, 30));
    }
    shifted.push_back(draws(rng, 30, 5.0));
    const auto frac = one_vs_rest_rejection(shifted, TestMethod::MWU, 0.01);
    CHECK(frac.back()->rate == 1.0);
    for (std::size_t i = 0; i + 1 < frac.size(); ++i) {
        CHECK(frac[i]->denominator == 10);
        CHECK(frac[i]->rate == doctest::Approx(0.1).epsilon(0.5));
    }
    const auto pooled = one_vs_all_pooled(shifted, TestMethod::MWU, 0.01);
    CHECK(pooled.tests.size() == 11);
    CHECK(pooled.tests.back().rejected);
}

TEST_CASE("ecdf step contract") {
    const auto one = ecdf(std::vector<double>{5});
    REQUIRE(one.size() == 1);
    CHECK(one[0].value == 5);
    CHECK(one[0].fraction == 1.0);
    const auto tie = ecdf(std::vector<double>{1, 1, 2});
    REQUIRE(tie.size() == 2);
    CHECK(tie[0].fraction == doctest::Approx(2.0 / 3.0));
    CHECK(tie[1].fraction == 1.0);
    const auto three = ecdf(std::vector<double>{3, 1, 2});
    REQUIRE(three.size() == 3);
    CHECK(three[0].value == 1);
    CHECK(three[1].fraction == doctest::Approx(2.0 / 3.0));
    Rng rng(1);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> v(1 + rng.below(40));
        for (auto& x : v) {
            x = std::round(rng.normal() * 2.0);
        }
        const auto pts = ecdf(v);
        CHECK(pts.back().fraction == 1.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            CHECK(pts[i].value > pts[i - 1].value);
            CHECK(pts[i].fraction > pts[i - 1].fraction);
        }
    }
    CHECK_THROWS(ecdf(std::vector<double>{}));
}

TEST_CASE("jarque-bera") {
    std::vector<double> two_point;
    for (int i = 0; i < 50; ++i) {
        two_point.push_back(0.0);
        two_point.push_back(1.0);
    }
    const auto r = normality_test(two_point);
    CHECK(r.statistic == doctest::Approx(100.0 / 6.0));
    CHECK(r.p_value < 0.01);
    const auto flat = normality_test(std::vector<double>(25, 3.0));
    CHECK(flat.p_value == 0.0);
    CHECK(flat.note == "zero_variance");
    CHECK_THROWS_AS(normality_test(std::vector<double>(10, 1.0)), std::invalid_argument);

    Rng rng(31);
    int rejections = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto s = normality_test(draws(rng, 10000));
        CHECK(s.statistic >= 0.0);
        rejections += s.p_value < 0.01 ? 1 : 0;
    }
    CHECK(rejections <= 8);
}

TEST_CASE("test family csv") {
    Groups g{{1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}, {1, 2}};
    const auto fam = pairwise_family(g, TestMethod::KS, 0.01);
    std::ostringstream out;
    write_test_family_csv(out, {{"f1:x", &fam}}, {"a", "b", "c"});
    const std::string text = out.str();
    CHECK(text.rfind("family_id,unit_a,unit_b,statistic,p,p_adjusted,rejected\n", 0) == 0);
    CHECK(text.find("f1:x,a,b,1,") != std::string::npos);
    CHECK(text.find("f1:x,a,c,,,") != std::string::npos);
}
