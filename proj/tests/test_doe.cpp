#include "instascope/doe.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace instascope;

namespace {

// Each column, rescaled to [0,1), hits every stratum [k/n, (k+1)/n) once.
bool stratified(const Matrix& x, double lo, double hi) {
    const auto n = x.rows();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        std::vector<int> hits(static_cast<std::size_t>(n), 0);
        for (Eigen::Index r = 0; r < n; ++r) {
            const double u = (x(r, c) - lo) / (hi - lo);
            const auto k = static_cast<long>(std::floor(u * static_cast<double>(n)));
            if (k < 0 || k >= n) {
                return false;
            }
            ++hits[static_cast<std::size_t>(k)];
        }
        if (std::any_of(hits.begin(), hits.end(), [](int h) { return h != 1; })) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("lhs stratification") {
    CHECK(stratified(lhs_sample(4, 1, 9, 0.0, 1.0), 0.0, 1.0));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CHECK(stratified(lhs_sample(1000, 5, seed, -5.0, 5.0), -5.0, 5.0));
    }
    const Matrix big = lhs_sample(1000, 5, 3, -5.0, 5.0);
    CHECK(big.minCoeff() >= -5.0);
    CHECK(big.maxCoeff() <= 5.0);
}

TEST_CASE("lhs determinism and seed isolation") {
    CHECK(lhs_sample(50, 3, 11, -5, 5) == lhs_sample(50, 3, 11, -5, 5));
    CHECK(lhs_sample(50, 3, 11, -5, 5) != lhs_sample(50, 3, 12, -5, 5));
    const Matrix first = lhs_sample(30, 2, 1, -5, 5);
    lhs_sample(30, 2, 2, -5, 5);
    CHECK(lhs_sample(30, 2, 1, -5, 5) == first);
}

TEST_CASE("lhs marginal deviation from uniform is at most 1/n at stratum boundaries") {
    const int n = 1000;
    const Matrix x = lhs_sample(n, 3, 8, -5.0, 5.0);
    for (Eigen::Index c = 0; c < 3; ++c) {
        std::vector<double> col(x.col(c).data(), x.col(c).data() + n);
        std::sort(col.begin(), col.end());
        for (int k = 0; k <= n; ++k) {
            const double boundary = -5.0 + 10.0 * k / n;
            const auto below = std::lower_bound(col.begin(), col.end(), boundary) - col.begin();
            CHECK(std::abs(static_cast<double>(below) / n - static_cast<double>(k) / n) <= 1.0 / n + 1e-12);
        }
    }
}

TEST_CASE("lhs argument errors") {
    CHECK_THROWS_AS(lhs_sample(1, 2, 1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(lhs_sample(5, 0, 1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(lhs_sample(5, 2, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("build_doe shares X across instances") {
    const auto a = create_instance(ProblemId(1, 1, 3));
    const auto b = create_instance(ProblemId(1, 2, 3));
    const Doe da = build_doe(a, 20, 5);
    const Doe db = build_doe(b, 20, 5);
    CHECK(da.x == db.x);
    CHECK(da.y != db.y);
    const Doe small = build_doe(a, 3, 9);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const double expected = (small.x.row(i).transpose() - a.xopt()).squaredNorm() + a.fopt();
        CHECK(small.y[i] == doctest::Approx(expected).epsilon(1e-12));
    }
    const Doe big = build_doe(create_instance(ProblemId(3, 1, 5)), 1000, 1);
    CHECK(big.size() == 1000);
    CHECK(big.dim() == 5);
    CHECK(big.instance.has_value());
}

TEST_CASE("grid2d") {
    const Matrix g = grid2d(2, -5, 5);
    REQUIRE(g.rows() == 4);
    CHECK(g(0, 0) == -5);
    CHECK(g(0, 1) == -5);
    CHECK(g(1, 0) == 5);
    CHECK(g(1, 1) == -5);
    CHECK(g(2, 0) == -5);
    CHECK(g(2, 1) == 5);
    CHECK(g(3, 0) == 5);
    CHECK(g(3, 1) == 5);
    const Matrix m = grid2d(3, 0, 1);
    CHECK(m.rows() == 9);
    CHECK(m(4, 0) == 0.5);
    CHECK(m(4, 1) == 0.5);
    const Matrix f = grid2d(101, -5, 5);
    CHECK(f.rows() == 10201);
    CHECK(f(1, 0) - f(0, 0) == doctest::Approx(0.1));
    CHECK(f(10200, 0) == 5.0);
    CHECK_THROWS(grid2d(1, 0, 1));
}

TEST_CASE("doe csv") {
    Doe d;
    d.x = Matrix::Zero(2, 2);
    d.y = Vector::Ones(2);
    std::ostringstream out;
    write_doe_csv(out, d);
    CHECK(out.str() == "x1,x2,y\n0,0,1\n0,0,1\n");
}
