#pragma once

#include "instascope/transforms.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace instascope {

// Raw objective formulas evaluated at the end of the search-space part of a
// chain. Names follow the BBOB definitions.
enum class BaseFunction {
    Sphere,
    Ellipsoid,
    Rastrigin,
    LinearSlope,
    AttractiveSector,
    StepEllipsoid,
    Rosenbrock,
    Discus,
    BentCigar,
    SharpRidge,
    DifferentPowers,
    Weierstrass,
    Schaffers,
    GriewankRosenbrock,
    Schwefel,
    Gallagher,
    Katsuura,
    LunacekBiRastrigin,
};

std::string to_string(BaseFunction f);
BaseFunction base_function_from_string(const std::string& name);

// Peak table of the Gallagher functions (F21/F22). Peak 0 is the global one.
struct GallagherTable {
    Matrix peaks;       // n_peaks x d, search-space units
    Vector weights;     // n_peaks
    Matrix scales;      // n_peaks x d, diagonal of each peak's quadratic form
    Matrix rotation;    // d x d
    Matrix rotated_peaks;  // peaks * rotation^T; derived, rebuilt by refresh()

    void refresh();
};

namespace step {

struct Translate { Vector offset; };        // z -= offset
struct Linear { Matrix matrix; };           // z = M z
struct Oscillate {};                        // z = t_osz(z)
struct Asymmetric { double beta; };         // z = t_asy(z, beta)
struct Condition { double alpha; };         // z = Lambda^alpha z
struct Scale { double factor; };            // z *= factor
struct Offset { double value; };            // z += value (every coordinate)
struct Multiply { Vector factors; };        // z_i *= factors_i
struct BucheScale {};                       // sign/parity dependent Bueche-Rastrigin scaling
struct SchwefelCoupling { Vector anchor; }; // z_{i+1} += 0.25 (z_i - anchor_i)
struct Snapshot {};                         // keep a copy of z for the base formula
struct StepRound {};                        // step-ellipsoid rounding
enum class PenaltySource { Input, Current };
struct Penalty { double weight; PenaltySource source; double scale; };  // weight * f_pen(scale * v)
struct Base { BaseFunction function; std::vector<double> params; std::optional<GallagherTable> gallagher; };
struct ObjectiveOscillate {};               // value = t_osz(value)
struct ObjectivePower { double exponent; }; // value = value^exponent
struct ObjectiveShift { double value; };    // value += fopt

}  // namespace step

using Step = std::variant<step::Translate, step::Linear, step::Oscillate, step::Asymmetric,
                          step::Condition, step::Scale, step::Offset, step::Multiply,
                          step::BucheScale, step::SchwefelCoupling, step::Snapshot,
                          step::StepRound, step::Penalty, step::Base, step::ObjectiveOscillate,
                          step::ObjectivePower, step::ObjectiveShift>;

// Ordered list of transformation steps. Search-space steps run first, one
// Base step maps z to a scalar, objective steps follow; penalties accumulate
// separately and are added to the final value.
class TransformChain {
public:
    TransformChain() = default;
    explicit TransformChain(int dim) : dim_(dim) {}

    TransformChain& add(Step s) {
        steps_.push_back(std::move(s));
        return *this;
    }

    int dim() const { return dim_; }
    const std::vector<Step>& steps() const { return steps_; }

    double evaluate(std::span<const double> x) const;

    nlohmann::json to_json() const;
    static TransformChain from_json(const nlohmann::json& j);

    // Compact description, e.g. "translate > rotate > oscillate > base:ellipsoid".
    std::string describe() const;

private:
    int dim_ = 0;
    std::vector<Step> steps_;
};

}  // namespace instascope
