#include "instascope/stats.hpp"

#include "instascope/csv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace instascope {

std::string to_string(TestMethod m) {
    switch (m) {
        case TestMethod::KS:
            return "KS";
        case TestMethod::MWU:
            return "MWU";
        case TestMethod::JarqueBera:
            return "JarqueBera";
    }
    return "?";
}

double mean(std::span<const double> v) {
    if (v.empty()) {
        throw std::invalid_argument("mean of empty sample");
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double central_moment(std::span<const double> v, int order) {
    const double m = mean(v);
    double sum = 0.0;
    for (double x : v) {
        sum += std::pow(x - m, order);
    }
    return sum / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double sum = 0.0;
    for (double x : v) {
        sum += (x - m) * (x - m);
    }
    return std::sqrt(sum / static_cast<double>(v.size() - 1));
}

double quantile(std::span<const double> v, double q) {
    if (v.empty()) {
        throw std::invalid_argument("quantile of empty sample");
    }
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double h = (static_cast<double>(s.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        return std::nullopt;
    }
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        return std::nullopt;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) {
        return 1.0;
    }
    double p;
    if (lambda < 1.18) {
        // Jacobi-theta form converges fast for small lambda.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
            cdf += term;
            if (term < 1e-300) {
                break;
            }
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
        p = 1.0 - cdf;
    } else {
        double sum = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * lambda * lambda);
            sum += (k % 2 == 1 ? term : -term);
            if (term < 1e-300) {
                break;
            }
        }
        p = 2.0 * sum;
    }
    return std::clamp(p, 0.0, 1.0);
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string(what) + ": non-finite value");
        }
    }
}

}  // namespace

TestRecord ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < kMinKsSample || b.size() < kMinKsSample) {
        throw std::invalid_argument("ks_two_sample: samples too small");
    }
    require_finite(a, "ks_two_sample");
    require_finite(b, "ks_two_sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double v;
        if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
            v = sa[i];
        } else {
            v = sb[j];
        }
        while (i < sa.size() && sa[i] == v) {
            ++i;
        }
        while (j < sb.size() && sb[j] == v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    TestRecord rec;
    rec.method = TestMethod::KS;
    rec.statistic = d;
    rec.n1 = sa.size();
    rec.n2 = sb.size();
    const double ne = na * nb / (na + nb);
    rec.p_value = kolmogorov_survival(std::sqrt(ne) * d);
    return rec;
}

TestRecord ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
    if (a.size() < kMinKsSample) {
        throw std::invalid_argument("ks_one_sample: sample too small");
    }
    require_finite(a, "ks_one_sample");
    std::vector<double> s(a.begin(), a.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    TestRecord rec;
    rec.method = TestMethod::KS;
    rec.statistic = d;
    rec.n1 = s.size();
    rec.p_value = kolmogorov_survival(std::sqrt(n) * d);
    return rec;
}

TestRecord mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 3 || b.size() < 3) {
        throw std::invalid_argument("mann_whitney_u: samples too small");
    }
    require_finite(a, "mann_whitney_u");
    require_finite(b, "mann_whitney_u");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);

    TestRecord rec;
    rec.method = TestMethod::MWU;
    rec.n1 = n1;
    rec.n2 = n2;
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);
    const double center = n1d * n2d / 2.0;

    if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
        rec.statistic = center;
        rec.p_value = 1.0;
        rec.note = "all_tied";
        return rec;
    }

    const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
    const double u = rank_sum - n1d * (n1d + 1.0) / 2.0;
    rec.statistic = u;
    const double observed = std::abs(u - center);

    if (n <= kMwuExactLimit) {
        // Permutation distribution of U over all C(n, n1) splits of the
        // pooled midranks.
        std::uint64_t extreme = 0;
        std::uint64_t total = 0;
        const std::uint32_t full = 1u << n;
        for (std::uint32_t mask = 0; mask < full; ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) != n1) {
                continue;
            }
            double rs = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (mask & (1u << k)) {
                    rs += ranks[k];
                }
            }
            const double uk = rs - n1d * (n1d + 1.0) / 2.0;
            ++total;
            if (std::abs(uk - center) >= observed) {
                ++extreme;
            }
        }
        rec.p_value = static_cast<double>(extreme) / static_cast<double>(total);
        rec.note = "exact";
        return rec;
    }

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double nd = static_cast<double>(n);
    const double variance = n1d * n2d / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    const double z = std::max(0.0, observed - 0.5) / std::sqrt(variance);
    rec.p_value = std::min(1.0, std::erfc(z / std::numbers::sqrt2));
    rec.note = "normal";
    return rec;
}

TestRecord normality_test(std::span<const double> sample) {
    if (sample.size() < 20) {
        throw std::invalid_argument("normality_test: need at least 20 values");
    }
    require_finite(sample, "normality_test");
    TestRecord rec;
    rec.method = TestMethod::JarqueBera;
    rec.n1 = sample.size();
    const double m2 = central_moment(sample, 2);
    if (m2 <= 0.0) {
        rec.statistic = 0.0;
        rec.p_value = 0.0;
        rec.note = "zero_variance";
        return rec;
    }
    const double skew = central_moment(sample, 3) / std::pow(m2, 1.5);
    const double kurt = central_moment(sample, 4) / (m2 * m2) - 3.0;
    const double n = static_cast<double>(sample.size());
    rec.statistic = n / 6.0 * (skew * skew + kurt * kurt / 4.0);
    rec.p_value = std::exp(-rec.statistic / 2.0);  // chi-square, 2 dof
    return rec;
}

BhResult benjamini_hochberg(std::span<const double> pvals, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("benjamini_hochberg: alpha must be in (0, 1)");
    }
    const std::size_t m = pvals.size();
    BhResult out{std::vector<bool>(m, false), std::vector<double>(m, 1.0)};
    if (m == 0) {
        return out;
    }
    for (double p : pvals) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("benjamini_hochberg: p-value outside [0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
    const double md = static_cast<double>(m);
    std::size_t k = 0;  // number rejected
    for (std::size_t i = 0; i < m; ++i) {
        if (pvals[order[i]] <= static_cast<double>(i + 1) / md * alpha) {
            k = i + 1;
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        out.rejected[order[i]] = true;
    }
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        running = std::min(running, md * pvals[order[i]] / static_cast<double>(i + 1));
        out.adjusted[order[i]] = std::min(running, 1.0);
    }
    return out;
}

std::vector<bool> bonferroni(std::span<const double> pvals, double alpha) {
    std::vector<bool> out(pvals.size());
    const double m = static_cast<double>(pvals.size());
    for (std::size_t i = 0; i < pvals.size(); ++i) {
        out[i] = pvals[i] <= alpha / m;
    }
    return out;
}

std::size_t TestFamily::rejections() const {
    return static_cast<std::size_t>(std::count_if(tests.begin(), tests.end(), [](const PairTest& t) { return t.rejected; }));
}

std::uint64_t pair_count(std::uint64_t groups) {
    return groups < 2 ? 0 : groups * (groups - 1) / 2;
}

namespace {

TestRecord run_test(std::span<const double> a, std::span<const double> b, TestMethod method) {
    switch (method) {
        case TestMethod::KS:
            return ks_two_sample(a, b);
        case TestMethod::MWU:
            return mann_whitney_u(a, b);
        case TestMethod::JarqueBera:
            break;
    }
    throw std::invalid_argument("two-sample family needs KS or MWU");
}

void correct(TestFamily& family, double alpha) {
    std::vector<double> pvals;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < family.tests.size(); ++i) {
        if (family.tests[i].record) {
            pvals.push_back(family.tests[i].record->p_value);
            index.push_back(i);
        }
    }
    const auto bh = benjamini_hochberg(pvals, alpha);
    for (std::size_t k = 0; k < index.size(); ++k) {
        family.tests[index[k]].rejected = bh.rejected[k];
        family.tests[index[k]].p_adjusted = bh.adjusted[k];
    }
}

}  // namespace

TestFamily pairwise_family(const Groups& groups, TestMethod method, double alpha) {
    if (groups.size() < 2) {
        throw std::invalid_argument("pairwise_family: need at least 2 groups");
    }
    TestFamily family;
    family.tests.reserve(pair_count(groups.size()));
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            PairTest t;
            t.first = i;
            t.second = j;
            try {
                t.record = run_test(groups[i], groups[j], method);
            } catch (const std::invalid_argument&) {
                ++family.failed;
            }
            family.tests.push_back(std::move(t));
        }
    }
    correct(family, alpha);
    return family;
}

RejectionSummary pairwise_rejection_rate(const Groups& groups, TestMethod method, double alpha) {
    const auto family = pairwise_family(groups, method, alpha);
    RejectionSummary s;
    s.unit = SummaryUnit::PerFeature;
    s.numerator = family.rejections();
    s.denominator = family.valid();
    s.failed = family.failed;
    if (s.denominator == 0) {
        throw std::domain_error("pairwise_rejection_rate: every pair failed");
    }
    s.rate = static_cast<double>(s.numerator) / static_cast<double>(s.denominator);
    return s;
}

std::vector<std::optional<RejectionSummary>> one_vs_rest_from_family(const TestFamily& family, std::size_t groups) {
    std::vector<std::size_t> num(groups, 0);
    std::vector<std::size_t> den(groups, 0);
    std::vector<std::size_t> failed(groups, 0);
    for (const auto& t : family.tests) {
        for (std::size_t g : {t.first, t.second}) {
            if (g == kPooledRest) {
                continue;
            }
            if (!t.record) {
                ++failed[g];
                continue;
            }
            ++den[g];
            if (t.rejected) {
                ++num[g];
            }
        }
    }
    std::vector<std::optional<RejectionSummary>> out(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        if (den[g] == 0) {
            continue;
        }
        RejectionSummary s;
        s.unit = SummaryUnit::PerInstance;
        s.numerator = num[g];
        s.denominator = den[g];
        s.failed = failed[g];
        s.rate = static_cast<double>(num[g]) / static_cast<double>(den[g]);
        out[g] = s;
    }
    return out;
}

std::vector<std::optional<RejectionSummary>> one_vs_rest_rejection(const Groups& groups, TestMethod method,
                                                                   double alpha) {
    return one_vs_rest_from_family(pairwise_family(groups, method, alpha), groups.size());
}

TestFamily one_vs_all_pooled(const Groups& groups, TestMethod method, double alpha) {
    if (groups.size() < 2) {
        throw std::invalid_argument("one_vs_all_pooled: need at least 2 groups");
    }
    TestFamily family;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        std::vector<double> rest;
        for (std::size_t j = 0; j < groups.size(); ++j) {
            if (j != i) {
                rest.insert(rest.end(), groups[j].begin(), groups[j].end());
            }
        }
        PairTest t;
        t.first = i;
        t.second = kPooledRest;
        try {
            t.record = run_test(groups[i], rest, method);
        } catch (const std::invalid_argument&) {
            ++family.failed;
        }
        family.tests.push_back(std::move(t));
    }
    correct(family, alpha);
    return family;
}

std::vector<EcdfPoint> ecdf(std::span<const double> sample) {
    if (sample.empty()) {
        throw std::invalid_argument("ecdf: empty sample");
    }
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    std::vector<EcdfPoint> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i + 1] == s[i]) {
            continue;
        }
        out.push_back({s[i], i + 1 == s.size() ? 1.0 : static_cast<double>(i + 1) / n});
    }
    return out;
}

void write_test_family_csv(std::ostream& out, const std::vector<std::pair<std::string, const TestFamily*>>& families,
                           const std::vector<std::string>& unit_labels, bool header) {
    if (header) {
        out << "family_id,unit_a,unit_b,statistic,p,p_adjusted,rejected\n";
    }
    for (const auto& [id, family] : families) {
        for (const auto& t : family->tests) {
            std::string row = id + "," + unit_labels.at(t.first) + "," +
                              (t.second == kPooledRest ? std::string("rest") : unit_labels.at(t.second)) + ",";
            if (t.record) {
                row += format_double(t.record->statistic) + "," + format_double(t.record->p_value) + "," +
                       format_double(t.p_adjusted) + "," + (t.rejected ? "1" : "0");
            } else {
                row += ",,,";
            }
            out << row << '\n';
        }
    }
}

}  // namespace instascope
