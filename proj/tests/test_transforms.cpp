#include "instascope/chain.hpp"
#include "instascope/transforms.hpp"

#include <doctest.h>

#include <cmath>

using namespace instascope;

TEST_CASE("t_osz fixed points and frozen values") {
    CHECK(t_osz(0.0) == 0.0);
    CHECK(t_osz(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    const Vector zero = Vector::Zero(2);
    CHECK(t_osz(zero) == zero);
    // independent evaluations of the warp formula
    CHECK(t_osz(-2.0) == doctest::Approx(-2.021283508671628).epsilon(1e-14));
    CHECK(t_osz(3.0) == doctest::Approx(2.9531186245025984).epsilon(1e-14));
}

TEST_CASE("t_osz is odd-signed and monotone on a grid") {
    double previous = t_osz(-10.0);
    for (int i = -999; i <= 1000; ++i) {
        const double x = i / 100.0;
        const double y = t_osz(x);
        CHECK(std::signbit(y) == std::signbit(x));
        CHECK(y >= previous);
        previous = y;
    }
}

TEST_CASE("t_asy") {
    Vector neg(2);
    neg << -1.0, -2.0;
    CHECK(t_asy(neg, 0.5) == neg);
    Vector ones = Vector::Ones(2);
    CHECK(t_asy(ones, 0.2) == ones);
    Vector four(1);
    four << 4.0;
    CHECK(t_asy(four, 0.7)[0] == 4.0);
    Vector v(3);
    v << 4.0, 4.0, 4.0;
    const Vector w = t_asy(v, 0.5);
    CHECK(w[0] == 4.0);
    CHECK(w[1] == doctest::Approx(std::pow(4.0, 1.0 + 0.5 * 0.5 * 2.0)));
    CHECK(w[2] == doctest::Approx(std::pow(4.0, 1.0 + 0.5 * 1.0 * 2.0)));
}

TEST_CASE("lambda_alpha") {
    CHECK(lambda_alpha(1, 10.0) == Matrix::Identity(1, 1));
    CHECK(lambda_alpha(2, 1.0) == Matrix::Identity(2, 2));
    const Vector diag = lambda_alpha_diagonal(3, 100.0);
    CHECK(diag[0] == 1.0);
    CHECK(diag[1] == doctest::Approx(3.1622776601683795).epsilon(1e-15));
    CHECK(diag[2] == doctest::Approx(10.0).epsilon(1e-15));
    CHECK_THROWS(lambda_alpha_diagonal(3, 0.0));
}

TEST_CASE("f_pen") {
    CHECK(f_pen(Vector::Zero(3)) == 0.0);
    Vector six(1);
    six << 6.0;
    CHECK(f_pen(six) == 1.0);
    Vector v(2);
    v << -7.0, 5.0;
    CHECK(f_pen(v) == 4.0);
}

TEST_CASE("f_pen vanishes inside the domain") {
    for (int a = -50; a <= 50; a += 7) {
        for (int b = -50; b <= 50; b += 3) {
            Vector v(2);
            v << a / 10.0, b / 10.0;
            CHECK(f_pen(v) == 0.0);
        }
    }
}

TEST_CASE("rotation_from_seed") {
    const auto r1 = rotation_from_seed(1, 123);
    CHECK(std::abs(r1.matrix(0, 0)) == 1.0);
    const auto r5 = rotation_from_seed(5, 42);
    const Matrix err = r5.matrix * r5.matrix.transpose() - Matrix::Identity(5, 5);
    CHECK(err.cwiseAbs().maxCoeff() < 1e-10);
    const auto r3 = rotation_from_seed(3, 7);
    CHECK(std::abs(std::abs(r3.matrix.determinant()) - 1.0) < 1e-10);
    CHECK(rotation_from_seed(4, 99).matrix == rotation_from_seed(4, 99).matrix);
    CHECK(rotation_from_seed(4, 99).matrix != rotation_from_seed(4, 100).matrix);
}

TEST_CASE("transform chain round-trips through JSON") {
    TransformChain chain(3);
    Vector offset(3);
    offset << 1.0, -2.0, 0.5;
    chain.add(step::Translate{offset})
        .add(step::Linear{rotation_from_seed(3, 5).matrix})
        .add(step::Oscillate{})
        .add(step::Asymmetric{0.2})
        .add(step::Condition{10.0})
        .add(step::Base{BaseFunction::Rastrigin, {}, std::nullopt})
        .add(step::Penalty{1.0, step::PenaltySource::Input, 1.0})
        .add(step::ObjectiveShift{12.5});
    const auto restored = TransformChain::from_json(chain.to_json());
    CHECK(restored.describe() == chain.describe());
    for (int k = 0; k < 50; ++k) {
        const double x[3] = {std::sin(k) * 6.0, std::cos(1.3 * k) * 4.0, 0.1 * k - 2.0};
        CHECK(restored.evaluate(x) == chain.evaluate(x));
    }
    const double wrong[2] = {0.0, 0.0};
    CHECK_THROWS_AS(chain.evaluate(wrong), std::invalid_argument);
}
