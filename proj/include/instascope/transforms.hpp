#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace instascope {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Coordinate warps and helpers shared by the BBOB transformation chains.
// Exponents of the form i/(d-1) are taken as 0 when d == 1.

// Oscillation warp; t_osz(0) == 0.
double t_osz(double value);
Vector t_osz(const Vector& v);

// Asymmetry warp: positive entries x_i become x_i^(1 + beta*i/(d-1)*sqrt(x_i)).
Vector t_asy(const Vector& v, double beta);

// Diagonal of the conditioning matrix: alpha^(0.5*i/(d-1)) for i = 0..d-1.
Vector lambda_alpha_diagonal(int dim, double alpha);
Matrix lambda_alpha(int dim, double alpha);

// Boundary penalty sum_i max(0, |x_i| - 5)^2.
double f_pen(std::span<const double> x);
double f_pen(const Vector& x);

struct Rotation {
    Matrix matrix;
    int retries = 0;  // degenerate draws skipped (seed incremented each time)
};

// Standard-normal fill followed by row-wise Gram-Schmidt.
Rotation rotation_from_seed(int dim, std::uint64_t seed);

// i / (d - 1) with the d == 1 convention.
inline double index_ratio(int i, int dim) {
    return dim > 1 ? static_cast<double>(i) / static_cast<double>(dim - 1) : 0.0;
}

}  // namespace instascope
