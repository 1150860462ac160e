#include "instascope/chain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace instascope {

namespace {

constexpr std::array<const char*, 18> kBaseNames = {
    "sphere",        "ellipsoid",  "rastrigin",          "linear_slope",  "attractive_sector",
    "step_ellipsoid", "rosenbrock", "discus",            "bent_cigar",    "sharp_ridge",
    "different_powers", "weierstrass", "schaffers",      "griewank_rosenbrock", "schwefel",
    "gallagher",     "katsuura",   "lunacek_bi_rastrigin",
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Minimum of the 1-d Schwefel term, scaled so that f(xopt) = 0.
constexpr double kSchwefelOffset = 4.189828872724339;

struct State {
    std::span<const double> x;
    Vector z;
    Vector snapshot;
    double value = 0.0;
    double penalty = 0.0;
    bool has_value = false;
};

double rastrigin_term(const Vector& z) {
    double cos_sum = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        cos_sum += std::cos(kTwoPi * z[i]);
    }
    return 10.0 * (static_cast<double>(z.size()) - cos_sum);
}

double weierstrass(const Vector& z) {
    static const auto table = [] {
        std::array<std::pair<double, double>, 12> t{};
        for (int k = 0; k < 12; ++k) {
            t[k] = {std::pow(0.5, k), std::pow(3.0, k)};
        }
        return t;
    }();
    double f0 = 0.0;
    for (const auto& [amp, freq] : table) {
        f0 += amp * std::cos(kTwoPi * freq * 0.5);
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        for (const auto& [amp, freq] : table) {
            sum += amp * std::cos(kTwoPi * freq * (z[i] + 0.5));
        }
    }
    const double inner = sum / static_cast<double>(z.size()) - f0;
    return 10.0 * inner * inner * inner;
}

double katsuura(const Vector& z) {
    const double d = static_cast<double>(z.size());
    const double exponent = 10.0 / std::pow(d, 1.2);
    double product = 1.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double sum = 0.0;
        for (int j = 1; j <= 32; ++j) {
            const double p = std::ldexp(1.0, j);
            const double t = p * z[i];
            sum += std::abs(t - std::nearbyint(t)) / p;
        }
        product *= std::pow(1.0 + static_cast<double>(i + 1) * sum, exponent);
    }
    return 10.0 / (d * d) * (product - 1.0);
}

double gallagher(const GallagherTable& table, std::span<const double> x) {
    const Eigen::Index dim = table.peaks.cols();
    const Vector rx = table.rotation * Eigen::Map<const Vector>(x.data(), dim);
    const Matrix& rotated = table.rotated_peaks;
    double best = 0.0;
    for (Eigen::Index k = 0; k < table.peaks.rows(); ++k) {
        double q = 0.0;
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double diff = rx[j] - rotated(k, j);
            q += table.scales(k, j) * diff * diff;
        }
        best = std::max(best, table.weights[k] * std::exp(-q / (2.0 * static_cast<double>(dim))));
    }
    return 10.0 - best;
}

double base_value(const step::Base& base, const State& s) {
    const Vector& z = s.z;
    const int d = static_cast<int>(z.size());
    switch (base.function) {
        case BaseFunction::Sphere:
            return z.squaredNorm();
        case BaseFunction::Ellipsoid: {
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                sum += std::pow(10.0, 6.0 * index_ratio(i, d)) * z[i] * z[i];
            }
            return sum;
        }
        case BaseFunction::Rastrigin:
            return rastrigin_term(z) + z.squaredNorm();
        case BaseFunction::LinearSlope: {
            // params: xopt (every |xopt_i| = 5)
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                const double xo = base.params[static_cast<std::size_t>(i)];
                const double slope = (xo > 0.0 ? 1.0 : -1.0) * std::pow(10.0, index_ratio(i, d));
                const double zi = s.x[static_cast<std::size_t>(i)] * xo < 25.0 ? s.x[static_cast<std::size_t>(i)] : xo;
                sum += 5.0 * std::abs(slope) - slope * zi;
            }
            return sum;
        }
        case BaseFunction::AttractiveSector: {
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                const double w = z[i] * base.params[static_cast<std::size_t>(i)] > 0.0 ? 100.0 : 1.0;
                sum += (w * z[i]) * (w * z[i]);
            }
            return sum;
        }
        case BaseFunction::StepEllipsoid: {
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                sum += std::pow(10.0, 2.0 * index_ratio(i, d)) * z[i] * z[i];
            }
            return 0.1 * std::max(std::abs(s.snapshot[0]) / 1e4, sum);
        }
        case BaseFunction::Rosenbrock: {
            double sum = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const double a = z[i] * z[i] - z[i + 1];
                const double b = z[i] - 1.0;
                sum += 100.0 * a * a + b * b;
            }
            return sum;
        }
        case BaseFunction::Discus:
            return 1e6 * z[0] * z[0] + z.tail(d - 1).squaredNorm();
        case BaseFunction::BentCigar:
            return z[0] * z[0] + 1e6 * z.tail(d - 1).squaredNorm();
        case BaseFunction::SharpRidge:
            return z[0] * z[0] + 100.0 * z.tail(d - 1).norm();
        case BaseFunction::DifferentPowers: {
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                sum += std::pow(std::abs(z[i]), 2.0 + 4.0 * index_ratio(i, d));
            }
            return std::sqrt(sum);
        }
        case BaseFunction::Weierstrass:
            return weierstrass(z);
        case BaseFunction::Schaffers: {
            if (d < 2) {
                return 0.0;
            }
            double sum = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const double si = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
                const double sq = std::sqrt(si);
                const double sn = std::sin(50.0 * std::pow(si, 0.2));
                sum += sq + sq * sn * sn;
            }
            const double mean = sum / static_cast<double>(d - 1);
            return mean * mean;
        }
        case BaseFunction::GriewankRosenbrock: {
            if (d < 2) {
                return 0.0;
            }
            double sum = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const double a = z[i] * z[i] - z[i + 1];
                const double b = z[i] - 1.0;
                const double si = 100.0 * a * a + b * b;
                sum += si / 4000.0 - std::cos(si);
            }
            return 10.0 * sum / static_cast<double>(d - 1) + 10.0;
        }
        case BaseFunction::Schwefel: {
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                sum += z[i] * std::sin(std::sqrt(std::abs(z[i])));
            }
            return -sum / (100.0 * static_cast<double>(d)) + kSchwefelOffset;
        }
        case BaseFunction::Gallagher:
            if (!base.gallagher) {
                throw std::logic_error("gallagher base step without peak table");
            }
            return gallagher(*base.gallagher, s.x);
        case BaseFunction::Katsuura:
            return katsuura(z);
        case BaseFunction::LunacekBiRastrigin: {
            // params: mu0, mu1, s; snapshot holds xhat
            const double mu0 = base.params.at(0);
            const double mu1 = base.params.at(1);
            const double sv = base.params.at(2);
            double first = 0.0;
            double second = 0.0;
            for (int i = 0; i < d; ++i) {
                const double a = s.snapshot[i] - mu0;
                const double b = s.snapshot[i] - mu1;
                first += a * a;
                second += b * b;
            }
            return std::min(first, static_cast<double>(d) + sv * second) + rastrigin_term(z);
        }
    }
    throw std::logic_error("unknown base function");
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string to_string(BaseFunction f) {
    return kBaseNames.at(static_cast<std::size_t>(f));
}

BaseFunction base_function_from_string(const std::string& name) {
    const auto it = std::find(kBaseNames.begin(), kBaseNames.end(), name);
    if (it == kBaseNames.end()) {
        throw std::invalid_argument("unknown base function: " + name);
    }
    return static_cast<BaseFunction>(it - kBaseNames.begin());
}

void GallagherTable::refresh() {
    rotated_peaks = peaks * rotation.transpose();
}

double TransformChain::evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) {
        throw std::invalid_argument("evaluate: dimension mismatch");
    }
    State s;
    s.x = x;
    s.z = Eigen::Map<const Vector>(x.data(), dim_);
    for (const auto& st : steps_) {
        std::visit(
            Overloaded{
                [&](const step::Translate& t) { s.z -= t.offset; },
                [&](const step::Linear& l) { s.z = l.matrix * s.z; },
                [&](const step::Oscillate&) { s.z = t_osz(s.z); },
                [&](const step::Asymmetric& a) { s.z = t_asy(s.z, a.beta); },
                [&](const step::Condition& c) {
                    s.z = s.z.cwiseProduct(lambda_alpha_diagonal(dim_, c.alpha));
                },
                [&](const step::Scale& sc) { s.z *= sc.factor; },
                [&](const step::Offset& o) { s.z.array() += o.value; },
                [&](const step::Multiply& m) { s.z = s.z.cwiseProduct(m.factors); },
                [&](const step::BucheScale&) {
                    for (int i = 0; i < dim_; ++i) {
                        double factor = std::pow(10.0, 0.5 * index_ratio(i, dim_));
                        if (i % 2 == 0 && s.z[i] > 0.0) {
                            factor *= 10.0;
                        }
                        s.z[i] *= factor;
                    }
                },
                [&](const step::SchwefelCoupling& c) {
                    const Vector prev = s.z;
                    for (int i = 1; i < dim_; ++i) {
                        s.z[i] = prev[i] + 0.25 * (prev[i - 1] - c.anchor[i - 1]);
                    }
                },
                [&](const step::Snapshot&) { s.snapshot = s.z; },
                [&](const step::StepRound&) {
                    for (int i = 0; i < dim_; ++i) {
                        const double v = s.z[i];
                        s.z[i] = std::abs(v) > 0.5 ? std::floor(0.5 + v) : std::floor(0.5 + 10.0 * v) / 10.0;
                    }
                },
                [&](const step::Penalty& p) {
                    if (p.source == step::PenaltySource::Input) {
                        if (p.scale == 1.0) {
                            s.penalty += p.weight * f_pen(x);
                        } else {
                            Vector v = Eigen::Map<const Vector>(x.data(), dim_) * p.scale;
                            s.penalty += p.weight * f_pen(v);
                        }
                    } else {
                        s.penalty += p.weight * f_pen(Vector(s.z * p.scale));
                    }
                },
                [&](const step::Base& b) {
                    s.value = base_value(b, s);
                    s.has_value = true;
                },
                [&](const step::ObjectiveOscillate&) { s.value = t_osz(s.value); },
                [&](const step::ObjectivePower& p) { s.value = std::pow(s.value, p.exponent); },
                [&](const step::ObjectiveShift& o) { s.value += o.value; },
            },
            st);
    }
    if (!s.has_value) {
        throw std::logic_error("transform chain has no base step");
    }
    return s.value + s.penalty;
}

namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        rows.push_back(vector_json(m.row(r).transpose()));
    }
    return rows;
}

Matrix matrix_from(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) {
        return Matrix(0, 0);
    }
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        m.row(r) = vector_from(j.at(static_cast<std::size_t>(r))).transpose();
    }
    return m;
}

const char* source_name(step::PenaltySource s) {
    return s == step::PenaltySource::Input ? "input" : "current";
}

}  // namespace

json TransformChain::to_json() const {
    json out;
    out["dim"] = dim_;
    json list = json::array();
    for (const auto& st : steps_) {
        list.push_back(std::visit(
            Overloaded{
                [](const step::Translate& t) { return json{{"op", "translate"}, {"offset", vector_json(t.offset)}}; },
                [](const step::Linear& l) { return json{{"op", "linear"}, {"matrix", matrix_json(l.matrix)}}; },
                [](const step::Oscillate&) { return json{{"op", "oscillate"}}; },
                [](const step::Asymmetric& a) { return json{{"op", "asymmetric"}, {"beta", a.beta}}; },
                [](const step::Condition& c) { return json{{"op", "condition"}, {"alpha", c.alpha}}; },
                [](const step::Scale& s) { return json{{"op", "scale"}, {"factor", s.factor}}; },
                [](const step::Offset& o) { return json{{"op", "offset"}, {"value", o.value}}; },
                [](const step::Multiply& m) { return json{{"op", "multiply"}, {"factors", vector_json(m.factors)}}; },
                [](const step::BucheScale&) { return json{{"op", "buche_scale"}}; },
                [](const step::SchwefelCoupling& c) {
                    return json{{"op", "schwefel_coupling"}, {"anchor", vector_json(c.anchor)}};
                },
                [](const step::Snapshot&) { return json{{"op", "snapshot"}}; },
                [](const step::StepRound&) { return json{{"op", "step_round"}}; },
                [](const step::Penalty& p) {
                    return json{{"op", "penalty"}, {"weight", p.weight}, {"source", source_name(p.source)}, {"scale", p.scale}};
                },
                [](const step::Base& b) {
                    json j{{"op", "base"}, {"function", to_string(b.function)}, {"params", b.params}};
                    if (b.gallagher) {
                        j["gallagher"] = json{{"peaks", matrix_json(b.gallagher->peaks)},
                                              {"weights", vector_json(b.gallagher->weights)},
                                              {"scales", matrix_json(b.gallagher->scales)},
                                              {"rotation", matrix_json(b.gallagher->rotation)}};
                    }
                    return j;
                },
                [](const step::ObjectiveOscillate&) { return json{{"op", "objective_oscillate"}}; },
                [](const step::ObjectivePower& p) { return json{{"op", "objective_power"}, {"exponent", p.exponent}}; },
                [](const step::ObjectiveShift& o) { return json{{"op", "objective_shift"}, {"value", o.value}}; },
            },
            st));
    }
    out["steps"] = std::move(list);
    return out;
}

TransformChain TransformChain::from_json(const json& j) {
    TransformChain chain(j.at("dim").get<int>());
    for (const auto& s : j.at("steps")) {
        const auto op = s.at("op").get<std::string>();
        if (op == "translate") {
            chain.add(step::Translate{vector_from(s.at("offset"))});
        } else if (op == "linear") {
            chain.add(step::Linear{matrix_from(s.at("matrix"))});
        } else if (op == "oscillate") {
            chain.add(step::Oscillate{});
        } else if (op == "asymmetric") {
            chain.add(step::Asymmetric{s.at("beta").get<double>()});
        } else if (op == "condition") {
            chain.add(step::Condition{s.at("alpha").get<double>()});
        } else if (op == "scale") {
            chain.add(step::Scale{s.at("factor").get<double>()});
        } else if (op == "offset") {
            chain.add(step::Offset{s.at("value").get<double>()});
        } else if (op == "multiply") {
            chain.add(step::Multiply{vector_from(s.at("factors"))});
        } else if (op == "buche_scale") {
            chain.add(step::BucheScale{});
        } else if (op == "schwefel_coupling") {
            chain.add(step::SchwefelCoupling{vector_from(s.at("anchor"))});
        } else if (op == "snapshot") {
            chain.add(step::Snapshot{});
        } else if (op == "step_round") {
            chain.add(step::StepRound{});
        } else if (op == "penalty") {
            const auto src = s.at("source").get<std::string>() == "input" ? step::PenaltySource::Input
                                                                          : step::PenaltySource::Current;
            chain.add(step::Penalty{s.at("weight").get<double>(), src, s.at("scale").get<double>()});
        } else if (op == "base") {
            step::Base b{base_function_from_string(s.at("function").get<std::string>()),
                         s.at("params").get<std::vector<double>>(), std::nullopt};
            if (s.contains("gallagher")) {
                const auto& g = s.at("gallagher");
                GallagherTable table{matrix_from(g.at("peaks")), vector_from(g.at("weights")),
                                     matrix_from(g.at("scales")), matrix_from(g.at("rotation")), {}};
                table.refresh();
                b.gallagher = std::move(table);
            }
            chain.add(std::move(b));
        } else if (op == "objective_oscillate") {
            chain.add(step::ObjectiveOscillate{});
        } else if (op == "objective_power") {
            chain.add(step::ObjectivePower{s.at("exponent").get<double>()});
        } else if (op == "objective_shift") {
            chain.add(step::ObjectiveShift{s.at("value").get<double>()});
        } else {
            throw std::invalid_argument("unknown chain step: " + op);
        }
    }
    return chain;
}

std::string TransformChain::describe() const {
    std::string out;
    for (const auto& st : steps_) {
        if (!out.empty()) {
            out += " > ";
        }
        out += std::visit(
            Overloaded{
                [](const step::Translate&) -> std::string { return "translate"; },
                [](const step::Linear&) -> std::string { return "rotate"; },
                [](const step::Oscillate&) -> std::string { return "t_osz"; },
                [](const step::Asymmetric& a) -> std::string { return "t_asy(" + std::to_string(a.beta) + ")"; },
                [](const step::Condition& c) -> std::string { return "lambda(" + std::to_string(c.alpha) + ")"; },
                [](const step::Scale&) -> std::string { return "scale"; },
                [](const step::Offset&) -> std::string { return "offset"; },
                [](const step::Multiply&) -> std::string { return "multiply"; },
                [](const step::BucheScale&) -> std::string { return "buche_scale"; },
                [](const step::SchwefelCoupling&) -> std::string { return "schwefel_coupling"; },
                [](const step::Snapshot&) -> std::string { return "snapshot"; },
                [](const step::StepRound&) -> std::string { return "round"; },
                [](const step::Penalty&) -> std::string { return "penalty"; },
                [](const step::Base& b) -> std::string { return "base:" + to_string(b.function); },
                [](const step::ObjectiveOscillate&) -> std::string { return "t_osz(f)"; },
                [](const step::ObjectivePower&) -> std::string { return "pow(f)"; },
                [](const step::ObjectiveShift&) -> std::string { return "+fopt"; },
            },
            st);
    }
    return out;
}

}  // namespace instascope
