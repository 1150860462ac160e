#pragma once

#include "instascope/chain.hpp"
#include "instascope/transforms.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace instascope {

inline constexpr int kFunctionCount = 24;
inline constexpr double kDomainLower = -5.0;
inline constexpr double kDomainUpper = 5.0;

// (function id, instance id, dimension). Validated on construction.
class ProblemId {
public:
    ProblemId(int fid, int iid, int dim);

    int fid() const { return fid_; }
    int iid() const { return iid_; }
    int dim() const { return dim_; }

    auto operator<=>(const ProblemId&) const = default;

private:
    int fid_;
    int iid_;
    int dim_;
};

std::string to_string(const ProblemId& id);

// Human-readable BBOB function name, e.g. "sphere" for fid 1.
std::string function_name(int fid);

// Functions whose optimum is not drawn uniformly from [-4, 4]^d.
bool has_special_optimum(int fid);

// rseed = fid + 10000 * iid.
std::uint64_t derive_seed(int fid, int iid);

struct FunctionParams {
    double condition = 1.0;          // alpha of the Lambda step, 1 when unused
    double rosenbrock_scale = 1.0;   // max(1, sqrt(d)/8) for F8/F9/F19
    std::vector<double> slopes;      // F5 signed slopes
    std::vector<double> signs;       // F20/F24 random sign vector
    std::optional<GallagherTable> gallagher;  // F21/F22
};

// A materialized instance. Immutable; evaluate/precision are pure.
class ProblemInstance {
public:
    const ProblemId& id() const { return id_; }
    int dim() const { return id_.dim(); }
    const Vector& xopt() const { return xopt_; }
    double fopt() const { return fopt_; }
    const Matrix& rot_R() const { return rot_r_; }
    const Matrix& rot_Q() const { return rot_q_; }
    const FunctionParams& params() const { return params_; }
    const TransformChain& chain() const { return chain_; }
    int rotation_retries() const { return rotation_retries_; }

    double evaluate(std::span<const double> x) const { return chain_.evaluate(x); }
    double precision(std::span<const double> x) const { return evaluate(x) - fopt_; }

private:
    friend ProblemInstance create_instance(const ProblemId& id);
    ProblemInstance(ProblemId id) : id_(id) {}

    ProblemId id_;
    Vector xopt_;
    double fopt_ = 0.0;
    Matrix rot_r_;
    Matrix rot_q_;
    FunctionParams params_;
    TransformChain chain_;
    int rotation_retries_ = 0;
};

ProblemInstance create_instance(const ProblemId& id);

inline double evaluate(const ProblemInstance& inst, std::span<const double> x) { return inst.evaluate(x); }
inline double precision(const ProblemInstance& inst, std::span<const double> x) { return inst.precision(x); }

// CSV: fid,iid,dim,fopt,xopt_1..xopt_d. All instances must share one dimension.
void write_manifest(std::ostream& out, std::span<const ProblemInstance> instances);

}  // namespace instascope
