#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ttd/constraints.hpp"
#include "ttd/dataset.hpp"
#include "ttd/numerics.hpp"
#include "ttd/params.hpp"

namespace ttd {

/// Exact per-fact marginals P(l_f = 1) by enumerating every labeling of a
/// small instance. Rates are integrated out analytically per (source,
/// label class): the Gamma-Poisson evidence is a ratio of Gamma functions
/// and rate powers. Refuses instances with more than 15 facts.
inline std::vector<double> exact_posterior(const Dataset& d, const Hyperparams& hp,
                                           const ConstraintSpec& spec) {
    hp.validate();
    const std::size_t nf = d.num_facts();
    if (nf == 0) throw std::invalid_argument("cannot evaluate an empty dataset");
    if (nf > 15) throw std::invalid_argument("exact_posterior refuses more than 15 facts");

    const std::size_t ns = d.num_sources();
    const double log_p1 = std::log(hp.prior_truth());
    const double log_p0 = std::log(1.0 - hp.prior_truth());

    // constant across labelings; kept so weights are full marginal likelihoods
    double log_fact_const = 0.0;
    for (const Extraction& x : d.extractions) {
        log_fact_const -= log_gamma(static_cast<double>(x.count) + 1.0);
    }

    const std::uint32_t masks = 1u << nf;
    std::vector<double> logw(masks);
    std::vector<std::uint64_t> sum0(ns), sum1(ns), n0(ns), n1(ns);
    Labeling labels(nf);

    for (std::uint32_t mask = 0; mask < masks; ++mask) {
        for (std::size_t f = 0; f < nf; ++f) labels[f] = (mask >> f) & 1u;

        double lw = log_fact_const;
        for (std::size_t f = 0; f < nf; ++f) lw += labels[f] ? log_p1 : log_p0;

        std::fill(sum0.begin(), sum0.end(), 0);
        std::fill(sum1.begin(), sum1.end(), 0);
        std::fill(n0.begin(), n0.end(), 0);
        std::fill(n1.begin(), n1.end(), 0);
        for (const Extraction& x : d.extractions) {
            if (labels[x.fact]) {
                sum1[x.source] += x.count;
                n1[x.source]++;
            } else {
                sum0[x.source] += x.count;
                n0[x.source]++;
            }
        }
        auto evidence = [](double kappa, double mu, std::uint64_t s, std::uint64_t n) {
            return kappa * std::log(mu) - log_gamma(kappa) + log_gamma(kappa + static_cast<double>(s)) -
                   (kappa + static_cast<double>(s)) * std::log(mu + static_cast<double>(n));
        };
        for (std::size_t s = 0; s < ns; ++s) {
            const GammaPrior& gp = hp.prior_for(d.sources[s].signal);
            lw += evidence(gp.kappa0, gp.mu0, sum0[s], n0[s]);
            lw += evidence(gp.kappa1, gp.mu1, sum1[s], n1[s]);
        }

        if (spec.any()) {
            const ConstraintCounts cc = make_counts(d, labels);
            for (int r = 0; r < kNumRules; ++r) {
                if (spec.active(static_cast<Rule>(r))) {
                    lw -= hp.gamma[r] * static_cast<double>(cc.penalty[r]);
                }
            }
        }
        logw[mask] = lw;
    }

    const double total = log_sum_exp(logw);
    std::vector<double> marginals(nf);
    std::vector<double> on;
    on.reserve(masks / 2 + 1);
    for (std::size_t f = 0; f < nf; ++f) {
        on.clear();
        for (std::uint32_t mask = 0; mask < masks; ++mask) {
            if ((mask >> f) & 1u) on.push_back(logw[mask]);
        }
        marginals[f] = std::exp(log_sum_exp(on) - total);
    }
    return marginals;
}

}  // namespace ttd
