#include "instascope/transforms.hpp"

#include "instascope/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace instascope {

double t_osz(double value) {
    if (value == 0.0) {
        return 0.0;
    }
    const double xhat = std::log(std::abs(value));
    const double c1 = value > 0.0 ? 10.0 : 5.5;
    const double c2 = value > 0.0 ? 7.9 : 3.1;
    const double sign = value > 0.0 ? 1.0 : -1.0;
    return sign * std::exp(xhat + 0.049 * (std::sin(c1 * xhat) + std::sin(c2 * xhat)));
}

Vector t_osz(const Vector& v) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[i] = t_osz(v[i]);
    }
    return out;
}

Vector t_asy(const Vector& v, double beta) {
    const int dim = static_cast<int>(v.size());
    Vector out = v;
    for (int i = 0; i < dim; ++i) {
        if (v[i] > 0.0) {
            out[i] = std::pow(v[i], 1.0 + beta * index_ratio(i, dim) * std::sqrt(v[i]));
        }
    }
    return out;
}

Vector lambda_alpha_diagonal(int dim, double alpha) {
    if (dim < 1) {
        throw std::invalid_argument("lambda_alpha: dim must be >= 1");
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("lambda_alpha: alpha must be positive");
    }
    Vector diag(dim);
    for (int i = 0; i < dim; ++i) {
        diag[i] = std::pow(alpha, 0.5 * index_ratio(i, dim));
    }
    return diag;
}

Matrix lambda_alpha(int dim, double alpha) {
    return lambda_alpha_diagonal(dim, alpha).asDiagonal();
}

double f_pen(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) {
        const double excess = std::abs(v) - 5.0;
        if (excess > 0.0) {
            sum += excess * excess;
        }
    }
    return sum;
}

double f_pen(const Vector& x) {
    return f_pen(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

namespace {

// Returns false when a row collapses (rank-deficient draw).
bool gram_schmidt_rows(Matrix& m) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double original = m.row(i).norm();
        for (Eigen::Index j = 0; j < i; ++j) {
            m.row(i) -= m.row(i).dot(m.row(j)) * m.row(j);
        }
        const double norm = m.row(i).norm();
        if (!(norm > 1e-12 * original) || original == 0.0) {
            return false;
        }
        m.row(i) /= norm;
    }
    return true;
}

}  // namespace

Rotation rotation_from_seed(int dim, std::uint64_t seed) {
    if (dim < 1) {
        throw std::invalid_argument("rotation_from_seed: dim must be >= 1");
    }
    Rotation result;
    for (;;) {
        Rng rng(seed + static_cast<std::uint64_t>(result.retries));
        Matrix m(dim, dim);
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) {
                m(r, c) = rng.normal();
            }
        }
        if (gram_schmidt_rows(m)) {
            result.matrix = std::move(m);
            return result;
        }
        ++result.retries;
    }
}

}  // namespace instascope
