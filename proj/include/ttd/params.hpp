#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "ttd/types.hpp"

namespace ttd {

/// Gamma prior on a source's per-tuple extraction rates, shape/rate form.
/// kappa is the prior count mass, mu the prior number of tuples, so the
/// prior mean rate is kappa / mu.
struct GammaPrior {
    double kappa0 = 1.0;  // false side
    double mu0 = 2.0;
    double kappa1 = 2.0;  // true side
    double mu1 = 1.0;

    friend bool operator==(const GammaPrior&, const GammaPrior&) = default;
};

/// All model hyperparameters. Rate priors may differ per signal class;
/// both entries start identical. gamma[] is the constraint potential
/// strength per rule (0 disables a rule's potential even when active).
struct Hyperparams {
    double beta0 = 1.0;  // prior pseudo-count of false facts
    double beta1 = 1.0;  // prior pseudo-count of true facts
    std::array<GammaPrior, kNumSignals> rate_prior = {GammaPrior{}, GammaPrior{}};
    std::array<double, kNumRules> gamma = {2.0, 2.0, 2.0, 2.0};

    const GammaPrior& prior_for(SignalType s) const {
        return rate_prior[static_cast<int>(s)];
    }

    void set_rate_prior(const GammaPrior& p) { rate_prior = {p, p}; }

    void set_gamma(double g) { gamma = {g, g, g, g}; }

    /// Probability a fact is true under the collapsed Beta-Bernoulli prior.
    double prior_truth() const { return beta1 / (beta0 + beta1); }

    void validate() const {
        if (beta0 <= 0 || beta1 <= 0) throw std::invalid_argument("beta pseudo-counts must be positive");
        for (const auto& p : rate_prior) {
            if (p.kappa0 <= 0 || p.mu0 <= 0 || p.kappa1 <= 0 || p.mu1 <= 0) {
                throw std::invalid_argument("gamma prior parameters must be positive");
            }
        }
        for (double g : gamma) {
            if (g < 0) throw std::invalid_argument("constraint strength must be nonnegative");
        }
    }

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct RunConfig {
    std::uint32_t burn_in = 200;
    std::uint32_t samples = 300;  // retained sweeps per chain
    std::uint32_t thinning = 1;   // sweeps between retained samples
    std::uint32_t chains = 2;
    std::uint64_t seed = 0;
    double threshold = 0.5;  // trust above this marks a fact true

    void validate() const {
        if (samples < 1) throw std::invalid_argument("samples must be >= 1");
        if (thinning < 1) throw std::invalid_argument("thinning must be >= 1");
        if (chains < 1) throw std::invalid_argument("chains must be >= 1");
        if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must be in (0, 1)");
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace ttd
