#pragma once

#include "instascope/doe.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace instascope {

inline constexpr const char* kCatalogueVersion = "ela-catalogue/1";

enum class MissingReason {
    ZeroVariance,
    DivisionByZero,
    InsufficientData,
    DegenerateFold,
    NoBetterNeighbor,
    NonFinite,
    GroupFailure,
    Absent,  // column not present for this row (e.g. read from a narrower file)
};

std::string to_string(MissingReason r);
MissingReason missing_reason_from_string(const std::string& text);

struct FeatureValue {
    std::string name;
    std::optional<double> value;
    std::optional<MissingReason> reason;  // set iff value is empty
};

struct FeatureProvenance {
    std::optional<ProblemId> instance;
    std::uint64_t doe_seed = 0;
    std::vector<std::string> notes;  // e.g. rank-deficient meta-model designs
    std::vector<std::pair<std::string, double>> group_seconds;
};

// Ordered feature-name -> value map. Non-finite values are never stored;
// they become missing entries tagged NonFinite.
class FeatureVector {
public:
    void set(const std::string& name, double value);
    void set(const std::string& name, std::optional<double> value, MissingReason if_missing);
    void set_missing(const std::string& name, MissingReason reason);
    void append(const FeatureVector& other);

    const std::vector<FeatureValue>& entries() const { return entries_; }
    const FeatureValue* find(const std::string& name) const;
    std::optional<double> get(const std::string& name) const;
    std::size_t present_count() const;
    std::size_t size() const { return entries_.size(); }

    FeatureProvenance provenance;

private:
    std::vector<FeatureValue> entries_;
};

inline constexpr double kDefaultLevelQuantiles[] = {0.10, 0.25, 0.50};
inline constexpr double kDefaultDispQuantiles[] = {0.02, 0.05, 0.10, 0.25};
inline constexpr int kLevelFolds = 10;
inline constexpr double kPeakThreshold = 1e-3;   // fraction of the density maximum
inline constexpr int kKdeGridPoints = 512;
inline constexpr double kIcSettling = 0.05;

// Feature names, in vector order, for each group with default parameters.
const std::vector<std::string>& distr_names();
const std::vector<std::string>& meta_names();
std::vector<std::string> level_names(std::span<const double> quantiles);
const std::vector<std::string>& pca_names();
const std::vector<std::string>& nbc_names();
std::vector<std::string> disp_names(std::span<const double> quantiles);
const std::vector<std::string>& ic_names();

// Full catalogue in compute_all order.
const std::vector<std::string>& feature_catalogue();

FeatureVector ela_distr(const Doe& doe);
FeatureVector ela_meta(const Doe& doe);
FeatureVector ela_level(const Doe& doe, std::span<const double> quantiles = kDefaultLevelQuantiles);
FeatureVector pca_features(const Doe& doe);
FeatureVector nbc_features(const Doe& doe);
FeatureVector disp_features(const Doe& doe, std::span<const double> quantiles = kDefaultDispQuantiles);
FeatureVector ic_features(const Doe& doe);

// Every group in catalogue order. A failing group yields GroupFailure
// entries instead of aborting.
FeatureVector compute_all(const Doe& doe);

struct DegenerateReport {
    std::vector<std::string> kept;
    std::vector<std::string> dropped;
};

// Features constant (or entirely missing) across all rows.
DegenerateReport drop_degenerate(const std::vector<FeatureVector>& rows);

}  // namespace instascope
