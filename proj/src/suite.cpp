#include "instascope/suite.hpp"

#include "instascope/csv.hpp"
#include "instascope/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace instascope {

namespace {

constexpr std::array<const char*, kFunctionCount> kNames = {
    "sphere",
    "ellipsoid_separable",
    "rastrigin_separable",
    "buche_rastrigin",
    "linear_slope",
    "attractive_sector",
    "step_ellipsoid",
    "rosenbrock",
    "rosenbrock_rotated",
    "ellipsoid",
    "discus",
    "bent_cigar",
    "sharp_ridge",
    "different_powers",
    "rastrigin",
    "weierstrass",
    "schaffers10",
    "schaffers1000",
    "griewank_rosenbrock",
    "schwefel",
    "gallagher101",
    "gallagher21",
    "katsuura",
    "lunacek_bi_rastrigin",
};

constexpr double kSchwefelOptimum = 4.2096874633;
constexpr double kLunacekMu0 = 2.5;

bool uses_rotation_r(int fid) {
    switch (fid) {
        case 1: case 2: case 3: case 4: case 5: case 8: case 20:
            return false;
        default:
            return true;
    }
}

bool uses_rotation_q(int fid) {
    switch (fid) {
        case 6: case 7: case 13: case 15: case 16: case 17: case 18: case 23: case 24:
            return true;
        default:
            return false;
    }
}

// Uniform in [-4, 4], rounded to 4 decimals; exact zeros are nudged.
Vector uniform_xopt(Rng& rng, int dim) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) {
        double v = std::round((8.0 * rng.uniform() - 4.0) * 1e4) / 1e4;
        if (v == 0.0) {
            v = -1e-5;
        }
        x[i] = v;
    }
    return x;
}

double draw_fopt(Rng& rng) {
    const double v = std::round(100.0 * 100.0 * rng.cauchy()) / 100.0;
    return std::clamp(v, -1000.0, 1000.0);
}

Vector random_signs(Rng& rng, int dim) {
    Vector s(dim);
    for (int i = 0; i < dim; ++i) {
        s[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    return s;
}

GallagherTable gallagher_table(Rng& rng, int dim, int fid, const Matrix& rotation) {
    const bool many = fid == 21;
    const int n_peaks = many ? 101 : 21;
    const double width = many ? 10.0 : 9.8;
    const double half = many ? 5.0 : 4.9;
    const double top_condition = many ? 1000.0 : 1000.0 * 1000.0;

    GallagherTable t;
    t.rotation = rotation;
    t.peaks.resize(n_peaks, dim);
    for (int k = 0; k < n_peaks; ++k) {
        for (int j = 0; j < dim; ++j) {
            const double v = width * rng.uniform() - half;
            t.peaks(k, j) = k == 0 ? 0.8 * v : v;
        }
    }
    t.weights.resize(n_peaks);
    t.weights[0] = 10.0;
    for (int k = 1; k < n_peaks; ++k) {
        t.weights[k] = 1.1 + 8.0 * static_cast<double>(k - 1) / static_cast<double>(n_peaks - 2);
    }

    std::vector<double> conditions(static_cast<std::size_t>(n_peaks - 1));
    for (int j = 0; j < n_peaks - 1; ++j) {
        conditions[static_cast<std::size_t>(j)] =
            std::pow(1000.0, 2.0 * static_cast<double>(j) / static_cast<double>(n_peaks - 2));
    }
    rng.shuffle(conditions.begin(), conditions.end());

    // C_k = Lambda^alpha_k / alpha_k^(1/4) with a per-peak random permutation
    // of the diagonal.
    t.scales.resize(n_peaks, dim);
    std::vector<int> order(static_cast<std::size_t>(dim));
    for (int k = 0; k < n_peaks; ++k) {
        const double alpha = k == 0 ? top_condition : conditions[static_cast<std::size_t>(k - 1)];
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order.begin(), order.end());
        for (int j = 0; j < dim; ++j) {
            t.scales(k, j) = std::pow(alpha, 0.5 * index_ratio(order[static_cast<std::size_t>(j)], dim) - 0.25);
        }
    }
    t.refresh();
    return t;
}

}  // namespace

ProblemId::ProblemId(int fid, int iid, int dim) : fid_(fid), iid_(iid), dim_(dim) {
    if (fid < 1 || fid > kFunctionCount) {
        throw std::invalid_argument("ProblemId: fid must be in [1, 24], got " + std::to_string(fid));
    }
    if (iid < 1) {
        throw std::invalid_argument("ProblemId: iid must be >= 1, got " + std::to_string(iid));
    }
    if (dim < 2) {
        throw std::invalid_argument("ProblemId: dim must be >= 2, got " + std::to_string(dim));
    }
}

std::string to_string(const ProblemId& id) {
    return "f" + std::to_string(id.fid()) + "_i" + std::to_string(id.iid()) + "_d" + std::to_string(id.dim());
}

std::string function_name(int fid) {
    if (fid < 1 || fid > kFunctionCount) {
        throw std::invalid_argument("function_name: fid out of range");
    }
    return kNames[static_cast<std::size_t>(fid - 1)];
}

bool has_special_optimum(int fid) {
    switch (fid) {
        case 4: case 5: case 8: case 9: case 19: case 20: case 24:
            return true;
        default:
            return false;
    }
}

std::uint64_t derive_seed(int fid, int iid) {
    if (fid < 1 || fid > kFunctionCount) {
        throw std::invalid_argument("derive_seed: fid must be in [1, 24]");
    }
    if (iid < 1) {
        throw std::invalid_argument("derive_seed: iid must be >= 1");
    }
    return static_cast<std::uint64_t>(fid) + 10000ULL * static_cast<std::uint64_t>(iid);
}

ProblemInstance create_instance(const ProblemId& id) {
    const int fid = id.fid();
    const int d = id.dim();
    const std::uint64_t seed = derive_seed(fid, id.iid());

    ProblemInstance inst(id);
    Rng xopt_rng(seed);
    Rng fopt_rng(seed + 1);
    inst.fopt_ = draw_fopt(fopt_rng);

    inst.rot_r_ = Matrix::Identity(d, d);
    inst.rot_q_ = Matrix::Identity(d, d);
    if (uses_rotation_r(fid)) {
        auto r = rotation_from_seed(d, seed + 2);
        inst.rot_r_ = std::move(r.matrix);
        inst.rotation_retries_ += r.retries;
    }
    if (uses_rotation_q(fid)) {
        auto q = rotation_from_seed(d, seed + 3);
        inst.rot_q_ = std::move(q.matrix);
        inst.rotation_retries_ += q.retries;
    }
    const Matrix& R = inst.rot_r_;
    const Matrix& Q = inst.rot_q_;
    auto& p = inst.params_;
    p.rosenbrock_scale = std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0);

    TransformChain chain(d);
    Vector& xopt = inst.xopt_;
    using step::PenaltySource;

    switch (fid) {
        case 1:
            xopt = uniform_xopt(xopt_rng, d);
            chain.add(step::Translate{xopt}).add(step::Base{BaseFunction::Sphere, {}, {}});
            break;
        case 2:
            xopt = uniform_xopt(xopt_rng, d);
            chain.add(step::Translate{xopt}).add(step::Oscillate{}).add(step::Base{BaseFunction::Ellipsoid, {}, {}});
            break;
        case 3:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = 10.0;
            chain.add(step::Translate{xopt})
                .add(step::Oscillate{})
                .add(step::Asymmetric{0.2})
                .add(step::Condition{10.0})
                .add(step::Base{BaseFunction::Rastrigin, {}, {}});
            break;
        case 4:
            xopt = uniform_xopt(xopt_rng, d);
            for (int i = 0; i < d; i += 2) {
                xopt[i] = std::abs(xopt[i]);
            }
            chain.add(step::Translate{xopt})
                .add(step::Oscillate{})
                .add(step::BucheScale{})
                .add(step::Base{BaseFunction::Rastrigin, {}, {}})
                .add(step::Penalty{100.0, PenaltySource::Input, 1.0});
            break;
        case 5: {
            xopt = uniform_xopt(xopt_rng, d);
            for (int i = 0; i < d; ++i) {
                xopt[i] = xopt[i] >= 0.0 ? 5.0 : -5.0;
                p.slopes.push_back((xopt[i] > 0.0 ? 1.0 : -1.0) * std::pow(10.0, index_ratio(i, d)));
            }
            chain.add(step::Base{BaseFunction::LinearSlope, std::vector<double>(xopt.data(), xopt.data() + d), {}});
            break;
        }
        case 6:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = 10.0;
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Condition{10.0})
                .add(step::Linear{Q})
                .add(step::Base{BaseFunction::AttractiveSector, std::vector<double>(xopt.data(), xopt.data() + d), {}})
                .add(step::ObjectiveOscillate{})
                .add(step::ObjectivePower{0.9});
            break;
        case 7:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = 10.0;
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Condition{10.0})
                .add(step::Snapshot{})
                .add(step::StepRound{})
                .add(step::Linear{Q})
                .add(step::Base{BaseFunction::StepEllipsoid, {}, {}})
                .add(step::Penalty{1.0, PenaltySource::Input, 1.0});
            break;
        case 8:
            xopt = 0.75 * uniform_xopt(xopt_rng, d);
            chain.add(step::Translate{xopt})
                .add(step::Scale{p.rosenbrock_scale})
                .add(step::Offset{1.0})
                .add(step::Base{BaseFunction::Rosenbrock, {}, {}});
            break;
        case 9:
        case 19:
            xopt = R.transpose() * Vector::Constant(d, 0.5 / p.rosenbrock_scale);
            chain.add(step::Linear{R})
                .add(step::Scale{p.rosenbrock_scale})
                .add(step::Offset{0.5})
                .add(step::Base{fid == 9 ? BaseFunction::Rosenbrock : BaseFunction::GriewankRosenbrock, {}, {}});
            break;
        case 10:
        case 11:
            xopt = uniform_xopt(xopt_rng, d);
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Oscillate{})
                .add(step::Base{fid == 10 ? BaseFunction::Ellipsoid : BaseFunction::Discus, {}, {}});
            break;
        case 12:
            xopt = uniform_xopt(xopt_rng, d);
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Asymmetric{0.5})
                .add(step::Linear{R})
                .add(step::Base{BaseFunction::BentCigar, {}, {}});
            break;
        case 13:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = 10.0;
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Condition{10.0})
                .add(step::Linear{Q})
                .add(step::Base{BaseFunction::SharpRidge, {}, {}});
            break;
        case 14:
            xopt = uniform_xopt(xopt_rng, d);
            chain.add(step::Translate{xopt}).add(step::Linear{R}).add(step::Base{BaseFunction::DifferentPowers, {}, {}});
            break;
        case 15:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = 10.0;
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Oscillate{})
                .add(step::Asymmetric{0.2})
                .add(step::Linear{Q})
                .add(step::Condition{10.0})
                .add(step::Linear{R})
                .add(step::Base{BaseFunction::Rastrigin, {}, {}});
            break;
        case 16:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = 0.01;
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Oscillate{})
                .add(step::Linear{Q})
                .add(step::Condition{0.01})
                .add(step::Linear{R})
                .add(step::Base{BaseFunction::Weierstrass, {}, {}})
                .add(step::Penalty{10.0 / static_cast<double>(d), PenaltySource::Input, 1.0});
            break;
        case 17:
        case 18:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = fid == 17 ? 10.0 : 1000.0;
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Asymmetric{0.5})
                .add(step::Linear{Q})
                .add(step::Condition{p.condition})
                .add(step::Base{BaseFunction::Schaffers, {}, {}})
                .add(step::Penalty{10.0, PenaltySource::Input, 1.0});
            break;
        case 20: {
            const Vector signs = random_signs(xopt_rng, d);
            p.signs.assign(signs.data(), signs.data() + d);
            xopt = 0.5 * kSchwefelOptimum * signs;
            const Vector anchor = 2.0 * xopt.cwiseAbs();
            p.condition = 10.0;
            chain.add(step::Multiply{2.0 * signs})
                .add(step::SchwefelCoupling{anchor})
                .add(step::Translate{anchor})
                .add(step::Condition{10.0})
                .add(step::Translate{-anchor})
                .add(step::Scale{100.0})
                .add(step::Penalty{100.0, PenaltySource::Current, 0.01})
                .add(step::Base{BaseFunction::Schwefel, {}, {}});
            break;
        }
        case 21:
        case 22: {
            p.gallagher = gallagher_table(xopt_rng, d, fid, R);
            xopt = p.gallagher->peaks.row(0).transpose();
            chain.add(step::Base{BaseFunction::Gallagher, {}, p.gallagher})
                .add(step::ObjectiveOscillate{})
                .add(step::ObjectivePower{2.0})
                .add(step::Penalty{1.0, PenaltySource::Input, 1.0});
            break;
        }
        case 23:
            xopt = uniform_xopt(xopt_rng, d);
            p.condition = 100.0;
            chain.add(step::Translate{xopt})
                .add(step::Linear{R})
                .add(step::Condition{100.0})
                .add(step::Linear{Q})
                .add(step::Base{BaseFunction::Katsuura, {}, {}})
                .add(step::Penalty{1.0, PenaltySource::Input, 1.0});
            break;
        case 24: {
            const Vector signs = random_signs(xopt_rng, d);
            p.signs.assign(signs.data(), signs.data() + d);
            xopt = 0.5 * kLunacekMu0 * signs;
            p.condition = 100.0;
            const double dd = static_cast<double>(d);
            const double s = 1.0 - 1.0 / (2.0 * std::sqrt(dd + 20.0) - 8.2);
            const double mu1 = -std::sqrt((kLunacekMu0 * kLunacekMu0 - 1.0) / s);
            chain.add(step::Multiply{2.0 * signs})
                .add(step::Snapshot{})
                .add(step::Translate{Vector::Constant(d, kLunacekMu0)})
                .add(step::Linear{R})
                .add(step::Condition{100.0})
                .add(step::Linear{Q})
                .add(step::Base{BaseFunction::LunacekBiRastrigin, {kLunacekMu0, mu1, s}, {}})
                .add(step::Penalty{1e4, PenaltySource::Input, 1.0});
            break;
        }
        default:
            throw std::invalid_argument("create_instance: unsupported fid " + std::to_string(fid));
    }
    chain.add(step::ObjectiveShift{inst.fopt_});
    inst.chain_ = std::move(chain);
    return inst;
}

void write_manifest(std::ostream& out, std::span<const ProblemInstance> instances) {
    if (instances.empty()) {
        out << "fid,iid,dim,fopt\n";
        return;
    }
    const int d = instances.front().dim();
    std::vector<std::string> header{"fid", "iid", "dim", "fopt"};
    for (int i = 1; i <= d; ++i) {
        header.push_back("xopt_" + std::to_string(i));
    }
    CsvWriter csv(out, header);
    for (const auto& inst : instances) {
        if (inst.dim() != d) {
            throw std::invalid_argument("write_manifest: mixed dimensions");
        }
        csv.cell(inst.id().fid()).cell(inst.id().iid()).cell(d).cell(inst.fopt());
        for (int i = 0; i < d; ++i) {
            csv.cell(inst.xopt()[i]);
        }
        csv.end_row();
    }
}

}  // namespace instascope
