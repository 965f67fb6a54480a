#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "monreco/errors.hpp"

namespace monreco {

// Deterministic random source. Every piece of randomness in the artifact
// flows through this wrapper: raw mt19937_64 draws (whose sequence is fixed
// by the standard) are transformed with explicit arithmetic instead of the
// std distributions, whose output is implementation-defined.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased index in [0, n) by rejection.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw DomainError("uniform_index: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t draw = next_u64();
        while (draw >= limit) draw = next_u64();
        return static_cast<std::size_t>(draw % n);
    }

    // Knuth's product-of-uniforms sampler; adequate for the fleet-scale means
    // used here (exp(-43) is still comfortably inside double range).
    int poisson(double lambda) {
        if (lambda < 0.0) throw DomainError("poisson: lambda must be nonnegative");
        const double floor = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > floor);
        return k - 1;
    }

    // k distinct indices from [0, n), order determined by the draw sequence.
    std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k) {
        if (k > n) throw DomainError("sample_distinct: k exceeds n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + uniform_index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace monreco
