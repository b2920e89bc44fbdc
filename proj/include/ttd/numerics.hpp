#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ttd {

/// Log-gamma via the Lanczos series (g = 7, 9 coefficients).
/// Thread-safe, deterministic, ~15 significant digits for x > 0.
inline double log_gamma(double x) {
    static constexpr double coef[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };
    if (x < 0.5) {
        // reflection: Gamma(x) = pi / (sin(pi x) * Gamma(1 - x))
        return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double series = coef[0];
    for (int i = 1; i < 9; ++i) {
        series += coef[i] / (z + i);
    }
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(series);
}

/// log Poisson(k; mean), including the -log(k!) term.
inline double poisson_log_pmf(std::uint64_t k, double mean) {
    return static_cast<double>(k) * std::log(mean) - mean - log_gamma(static_cast<double>(k) + 1.0);
}

/// log Gamma(x; shape, rate) density.
inline double gamma_log_pdf(double x, double shape, double rate) {
    return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

/// Numerically stable 1 / (1 + exp(-x)).
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double log_sum_exp(std::span<const double> xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace ttd
