#pragma once

#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <random>
#include <utility>

namespace instascope {

// Deterministic 64-bit generator. Draws are derived from raw mt19937_64
// output rather than the std distributions, whose algorithms are
// implementation-defined, so a seed maps to the same numbers everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lower, double upper) { return lower + (upper - lower) * uniform(); }

    // Box-Muller; consumes two uniforms per draw and caches nothing.
    double normal();

    // Ratio of two independent normals.
    double cauchy();

    // Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);

    int rademacher() { return (next() >> 63) != 0 ? 1 : -1; }

    template <class RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        auto n = static_cast<std::uint64_t>(std::distance(first, last));
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = below(i);
            using std::swap;
            swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer folded over the parts; used to derive independent
// stream seeds from structured keys (run seeds, fold assignment, ...).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace instascope
