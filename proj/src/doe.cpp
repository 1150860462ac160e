#include "instascope/doe.hpp"

#include "instascope/csv.hpp"
#include "instascope/rng.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace instascope {

namespace {
constexpr std::uint64_t kLhsStream = 0x4c48532d646f6531ULL;
}

Matrix lhs_sample(int n, int dim, std::uint64_t seed, double lower, double upper) {
    if (n < 2) {
        throw std::invalid_argument("lhs_sample: n must be >= 2");
    }
    if (dim < 1) {
        throw std::invalid_argument("lhs_sample: dim must be >= 1");
    }
    if (!(lower < upper)) {
        throw std::invalid_argument("lhs_sample: lower must be < upper");
    }
    Rng rng(mix_seed({kLhsStream, seed}));
    Matrix x(n, dim);
    std::vector<int> strata(static_cast<std::size_t>(n));
    const double width = (upper - lower) / static_cast<double>(n);
    for (int c = 0; c < dim; ++c) {
        std::iota(strata.begin(), strata.end(), 0);
        rng.shuffle(strata.begin(), strata.end());
        for (int r = 0; r < n; ++r) {
            const double offset = static_cast<double>(strata[static_cast<std::size_t>(r)]) + rng.uniform();
            x(r, c) = lower + offset * width;
        }
    }
    return x;
}

Doe build_doe(const ProblemInstance& inst, int n, std::uint64_t seed) {
    Doe doe;
    doe.x = lhs_sample(n, inst.dim(), seed, kDomainLower, kDomainUpper);
    doe.y.resize(n);
    doe.seed = seed;
    doe.instance = inst.id();
    std::vector<double> row(static_cast<std::size_t>(inst.dim()));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < inst.dim(); ++c) {
            row[static_cast<std::size_t>(c)] = doe.x(r, c);
        }
        doe.y[r] = inst.evaluate(row);
    }
    return doe;
}

Matrix grid2d(int resolution, double lower, double upper) {
    if (resolution < 2) {
        throw std::invalid_argument("grid2d: resolution must be >= 2");
    }
    Matrix g(static_cast<Eigen::Index>(resolution) * resolution, 2);
    const double step = (upper - lower) / static_cast<double>(resolution - 1);
    for (int j = 0; j < resolution; ++j) {
        for (int i = 0; i < resolution; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(j) * resolution + i;
            g(row, 0) = i == resolution - 1 ? upper : lower + step * i;
            g(row, 1) = j == resolution - 1 ? upper : lower + step * j;
        }
    }
    return g;
}

void write_doe_csv(std::ostream& out, const Doe& doe) {
    std::vector<std::string> header;
    for (int c = 1; c <= doe.dim(); ++c) {
        header.push_back("x" + std::to_string(c));
    }
    header.emplace_back("y");
    CsvWriter csv(out, header);
    for (Eigen::Index r = 0; r < doe.size(); ++r) {
        for (int c = 0; c < doe.dim(); ++c) {
            csv.cell(doe.x(r, c));
        }
        csv.cell(doe.y[r]);
        csv.end_row();
    }
}

}  // namespace instascope
