#pragma once

#include "instascope/suite.hpp"
#include "instascope/transforms.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace instascope {

// Sample matrix (n x d) with objective values for one instance. Synthetic
// designs used in tests carry no instance.
struct Doe {
    Matrix x;
    Vector y;
    std::uint64_t seed = 0;
    std::optional<ProblemId> instance;

    Eigen::Index size() const { return x.rows(); }
    int dim() const { return static_cast<int>(x.cols()); }
};

// Jittered Latin hypercube: each column is a random permutation of the n
// strata with a uniform offset inside each stratum. Depends only on
// (n, dim, seed), never on an instance.
Matrix lhs_sample(int n, int dim, std::uint64_t seed, double lower, double upper);

Doe build_doe(const ProblemInstance& inst, int n, std::uint64_t seed);

// resolution^2 lattice points of [lower, upper]^2; the first coordinate
// varies fastest.
Matrix grid2d(int resolution, double lower, double upper);

// Header x1..xd,y.
void write_doe_csv(std::ostream& out, const Doe& doe);

}  // namespace instascope
