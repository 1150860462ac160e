#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace instascope {

enum class TestMethod { KS, MWU, JarqueBera };

std::string to_string(TestMethod m);

struct TestRecord {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    TestMethod method = TestMethod::KS;
    std::string note;  // reason code for conventions such as "all_tied" or "zero_variance"
};

enum class SummaryUnit { PerFeature, PerInstance, PerFunction };

struct RejectionSummary {
    SummaryUnit unit = SummaryUnit::PerFeature;
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    double rate = 0.0;
    std::size_t failed = 0;  // tests that could not be run; excluded from both counts
};

// --- descriptive helpers -------------------------------------------------

double mean(std::span<const double> v);
// Population (1/n) central moment of the given order.
double central_moment(std::span<const double> v, int order);
double sample_sd(std::span<const double> v);  // 1/(n-1)
// Linear-interpolation quantile (R type 7).
double quantile(std::span<const double> v, double q);
// 1-based midranks.
std::vector<double> midranks(std::span<const double> v);
// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

double normal_cdf(double z);

// --- tests -----------------------------------------------------------------

// Survival function of the asymptotic Kolmogorov distribution.
double kolmogorov_survival(double lambda);

// Two-sample KS; p from the Kolmogorov limit at sqrt(n1 n2 / (n1 + n2)) * D.
// Both samples need at least kMinKsSample finite values.
inline constexpr std::size_t kMinKsSample = 4;
TestRecord ks_two_sample(std::span<const double> a, std::span<const double> b);

// One-sample KS against a continuous CDF.
TestRecord ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf);

// Mann-Whitney U with midranks. Exact permutation p when n1 + n2 <= 12,
// otherwise the tie-corrected normal approximation with continuity correction.
inline constexpr std::size_t kMwuExactLimit = 12;
TestRecord mann_whitney_u(std::span<const double> a, std::span<const double> b);

// Jarque-Bera; n >= 20.
TestRecord normality_test(std::span<const double> sample);

struct BhResult {
    std::vector<bool> rejected;   // original order
    std::vector<double> adjusted;
};

BhResult benjamini_hochberg(std::span<const double> pvals, double alpha = 0.01);
std::vector<bool> bonferroni(std::span<const double> pvals, double alpha);

// --- families ----------------------------------------------------------------

inline constexpr std::size_t kPooledRest = static_cast<std::size_t>(-1);

struct PairTest {
    std::size_t first = 0;
    std::size_t second = 0;  // kPooledRest for one-vs-all pooled tests
    std::optional<TestRecord> record;  // empty when the test failed
    double p_adjusted = 1.0;
    bool rejected = false;
};

struct TestFamily {
    std::vector<PairTest> tests;
    std::size_t failed = 0;

    std::size_t valid() const { return tests.size() - failed; }
    std::size_t rejections() const;
};

std::uint64_t pair_count(std::uint64_t groups);

using Groups = std::vector<std::vector<double>>;

// All unordered pairs, BH across the whole family.
TestFamily pairwise_family(const Groups& groups, TestMethod method, double alpha);
RejectionSummary pairwise_rejection_rate(const Groups& groups, TestMethod method, double alpha);

// Per-group fraction of rejected pairwise tests involving that group, from
// a pairwise family corrected as a whole. Groups whose every test failed
// yield nullopt.
std::vector<std::optional<RejectionSummary>> one_vs_rest_from_family(const TestFamily& family,
                                                                     std::size_t groups);
std::vector<std::optional<RejectionSummary>> one_vs_rest_rejection(const Groups& groups, TestMethod method,
                                                                   double alpha);

// Each group against the pooled union of all other groups; one test per
// group, BH across the g tests.
TestFamily one_vs_all_pooled(const Groups& groups, TestMethod method, double alpha);

struct EcdfPoint {
    double value;
    double fraction;
};

std::vector<EcdfPoint> ecdf(std::span<const double> sample);

// CSV: family_id,unit_a,unit_b,statistic,p,p_adjusted,rejected. Failed tests
// are written with empty statistic/p cells.
void write_test_family_csv(std::ostream& out, const std::vector<std::pair<std::string, const TestFamily*>>& families,
                           const std::vector<std::string>& unit_labels, bool header = true);

}  // namespace instascope
