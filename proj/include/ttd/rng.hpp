#pragma once

#include <cstdint>
#include <random>

namespace ttd {

/// splitmix64 step; used to derive independent stream seeds from one root seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Fixed arithmetic for sub-stream seeds: seed -> stream `tag`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag + 1));
}

/// Seeded RNG with the sampling primitives the model needs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
    }

    /// Gamma with shape/rate parameterization (mean = shape / rate).
    double gamma(double shape, double rate) {
        return std::gamma_distribution<double>(shape, 1.0 / rate)(gen_);
    }

    double beta(double a, double b) {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

    std::uint64_t poisson(double mean) {
        if (mean < 1e-300) return 0;  // point mass at zero; the std distribution needs mean > 0
        return std::poisson_distribution<std::uint64_t>(mean)(gen_);
    }

    /// Zero-truncated Poisson: Poisson conditioned on the draw being >= 1.
    std::uint64_t poisson_positive(double mean) {
        if (mean < 1e-8) return 1;  // P(k > 1 | k >= 1) vanishes
        for (;;) {
            const std::uint64_t k = poisson(mean);
            if (k >= 1) return k;
        }
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace ttd
