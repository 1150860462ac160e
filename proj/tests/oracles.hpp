#pragma once

// Brute-force reference implementations used to cross-check the statistics
// module. They trade speed for directness and share no code with it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// sup_t |F_a(t) - F_b(t)| by counting at every pooled point.
inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    for (double t : pooled) {
        double ca = 0.0;
        double cb = 0.0;
        for (double v : a) {
            ca += v <= t ? 1.0 : 0.0;
        }
        for (double v : b) {
            cb += v <= t ? 1.0 : 0.0;
        }
        d = std::max(d, std::abs(ca / static_cast<double>(a.size()) - cb / static_cast<double>(b.size())));
    }
    return d;
}

// U by pair counting: a_i > b_j counts 1, ties 1/2.
inline double mwu_u(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) {
            u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
        }
    }
    return u;
}

namespace detail {

inline void enumerate(const std::vector<double>& pooled, std::size_t n1, std::size_t start, std::vector<std::size_t>& pick,
                      double center, double observed, std::uint64_t& extreme, std::uint64_t& total) {
    if (pick.size() == n1) {
        std::vector<double> a;
        std::vector<double> b;
        std::size_t k = 0;
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            if (k < pick.size() && pick[k] == i) {
                a.push_back(pooled[i]);
                ++k;
            } else {
                b.push_back(pooled[i]);
            }
        }
        ++total;
        if (std::abs(mwu_u(a, b) - center) >= observed) {
            ++extreme;
        }
        return;
    }
    for (std::size_t i = start; i < pooled.size(); ++i) {
        pick.push_back(i);
        enumerate(pooled, n1, i + 1, pick, center, observed, extreme, total);
        pick.pop_back();
    }
}

}  // namespace detail

// Two-sided permutation p over all splits of the pooled sample.
inline double mwu_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double center = static_cast<double>(a.size() * b.size()) / 2.0;
    const double observed = std::abs(mwu_u(a, b) - center);
    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    std::vector<std::size_t> pick;
    detail::enumerate(pooled, a.size(), 0, pick, center, observed, extreme, total);
    return static_cast<double>(extreme) / static_cast<double>(total);
}

// Step-up rule in counting form: k* = max k with #{p <= k alpha / m} >= k,
// reject every p <= k* alpha / m.
inline std::vector<bool> bh_rejections(const std::vector<double>& p, double alpha) {
    const std::size_t m = p.size();
    const double md = static_cast<double>(m);
    std::size_t best = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        const double threshold = static_cast<double>(k) / md * alpha;
        const auto count = static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [&](double v) { return v <= threshold; }));
        if (count >= k) {
            best = k;
        }
    }
    std::vector<bool> out(m, false);
    if (best == 0) {
        return out;
    }
    const double threshold = static_cast<double>(best) / md * alpha;
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = p[i] <= threshold;
    }
    return out;
}

}  // namespace oracle
