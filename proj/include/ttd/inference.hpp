#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "ttd/constraints.hpp"
#include "ttd/dataset.hpp"
#include "ttd/numerics.hpp"
#include "ttd/params.hpp"
#include "ttd/rng.hpp"

namespace ttd {

struct SourceRates {
    double lambda0 = 0, lambda1 = 0;
    double log_lambda0 = 0, log_lambda1 = 0;
};

/// One chain's mutable state. Fact trustworthiness is collapsed out
/// analytically (Beta-Bernoulli), so only labels and rates are sampled.
/// `counts` mirrors constraint_counts_all for the full rule set at all
/// times; flips update it incrementally.
struct SamplerState {
    Labeling labels;
    std::vector<SourceRates> rates;
    ConstraintCounts counts;
    Rng rng;

    explicit SamplerState(std::uint64_t seed) : rng(seed) {}
};

inline void set_rates(SamplerState& st, std::uint32_t source, double lambda0, double lambda1) {
    lambda0 = std::max(lambda0, 1e-300);  // keep log odds finite if a draw underflows
    lambda1 = std::max(lambda1, 1e-300);
    st.rates[source] = {lambda0, lambda1, std::log(lambda0), std::log(lambda1)};
}

/// Labels drawn from the prior truth probability, rates at their prior
/// means, caches rebuilt from scratch.
inline SamplerState init_state(const Dataset& d, const Hyperparams& hp, const ConstraintSpec& spec,
                               std::uint64_t seed) {
    (void)spec;
    hp.validate();
    if (d.num_facts() == 0) throw std::invalid_argument("cannot sample an empty dataset");
    SamplerState st(seed);
    st.labels.resize(d.num_facts());
    const double p1 = hp.prior_truth();
    for (auto& l : st.labels) l = st.rng.bernoulli(p1) ? 1 : 0;
    st.rates.resize(d.num_sources());
    for (std::uint32_t s = 0; s < d.num_sources(); ++s) {
        const GammaPrior& gp = hp.prior_for(d.sources[s].signal);
        set_rates(st, s, gp.kappa0 / gp.mu0, gp.kappa1 / gp.mu1);
    }
    st.counts = make_counts(d, st.labels);
    return st;
}

/// log P(l_f = 1 | rest) - log P(l_f = 0 | rest):
/// the collapsed Beta-Bernoulli prior contributes log(beta1/beta0), each
/// extraction o * (log lambda1 - log lambda0) - (lambda1 - lambda0), and
/// every active rule -gamma times the penalty difference of flipping this
/// fact, which touches only the fact's own groups.
inline double label_log_odds(const SamplerState& st, const Dataset& d, const Hyperparams& hp,
                             const ConstraintSpec& spec, std::uint32_t fact) {
    double lo = std::log(hp.beta1 / hp.beta0);

    auto [ebegin, eend] = d.fact_edges.row(fact);
    for (auto it = ebegin; it != eend; ++it) {
        const Extraction& x = d.extractions[*it];
        const SourceRates& r = st.rates[x.source];
        lo += static_cast<double>(x.count) * (r.log_lambda1 - r.log_lambda0) - (r.lambda1 - r.lambda0);
    }

    const std::uint32_t cur = st.labels[fact];
    if (spec.c4) {
        const std::uint32_t excl = st.counts.c4[d.fact_g4[fact]] - cur;
        if (excl >= 1) lo -= hp.gamma[static_cast<int>(Rule::c4)];
    }
    if (spec.c3) {
        const std::uint32_t excl = st.counts.c3[d.fact_g3[fact]] - cur;
        if (excl >= 1) lo -= hp.gamma[static_cast<int>(Rule::c3)];
    }
    if (spec.c1 || spec.c2) {
        const std::uint32_t pair = d.fact_pair[fact];
        const std::uint32_t others = st.counts.pair_true[pair] - cur;
        if (others == 0) {
            // flipping f toggles this pair's indicator
            if (spec.c1) {
                const std::uint32_t excl = st.counts.c1[d.pair_value[pair]] - cur;
                if (excl >= 1) lo -= hp.gamma[static_cast<int>(Rule::c1)];
            }
            if (spec.c2) {
                const std::uint32_t excl = st.counts.c2[d.pair_entity[pair]] - cur;
                if (excl >= 1) lo -= hp.gamma[static_cast<int>(Rule::c2)];
            }
        }
    }
    return lo;
}

/// Draws l_f from its full conditional and keeps the caches in lockstep.
/// Consumes exactly one uniform whether or not the label changes.
inline void sample_label(SamplerState& st, const Dataset& d, const Hyperparams& hp,
                         const ConstraintSpec& spec, std::uint32_t fact) {
    const double p1 = sigmoid(label_log_odds(st, d, hp, spec, fact));
    const bool next = st.rng.uniform() < p1;
    if (next != static_cast<bool>(st.labels[fact])) {
        apply_flip(st.counts, d, fact, next);
        st.labels[fact] = next ? 1 : 0;
    }
}

struct RatePosterior {
    double shape0 = 0, rate0 = 0;
    double shape1 = 0, rate1 = 0;
};

/// Conjugate Gamma-Poisson update: prior parameters plus the source's
/// sufficient statistics under the current labels.
inline RatePosterior rate_posterior_params(const SamplerState& st, const Dataset& d,
                                           const Hyperparams& hp, std::uint32_t source) {
    std::uint64_t sum0 = 0, sum1 = 0, n0 = 0, n1 = 0;
    auto [ebegin, eend] = d.source_edges.row(source);
    for (auto it = ebegin; it != eend; ++it) {
        const Extraction& x = d.extractions[*it];
        if (st.labels[x.fact]) {
            sum1 += x.count;
            n1++;
        } else {
            sum0 += x.count;
            n0++;
        }
    }
    const GammaPrior& gp = hp.prior_for(d.sources[source].signal);
    return {gp.kappa0 + static_cast<double>(sum0), gp.mu0 + static_cast<double>(n0),
            gp.kappa1 + static_cast<double>(sum1), gp.mu1 + static_cast<double>(n1)};
}

inline void sample_rates(SamplerState& st, const Dataset& d, const Hyperparams& hp, std::uint32_t source) {
    const RatePosterior post = rate_posterior_params(st, d, hp, source);
    const double l0 = st.rng.gamma(post.shape0, post.rate0);
    const double l1 = st.rng.gamma(post.shape1, post.rate1);
    set_rates(st, source, l0, l1);
}

/// One systematic scan: every fact's label in index order, then every
/// source's rate pair in index order.
inline void gibbs_sweep(SamplerState& st, const Dataset& d, const Hyperparams& hp,
                        const ConstraintSpec& spec) {
    for (std::uint32_t f = 0; f < d.num_facts(); ++f) sample_label(st, d, hp, spec, f);
    for (std::uint32_t s = 0; s < d.num_sources(); ++s) sample_rates(st, d, hp, s);
}

/// Full log joint density of (labels, rates, counts): collapsed label
/// prior + Gamma priors + Poisson likelihoods (the -log o! terms are
/// included, not omitted) + the constraint potential
/// -sum_r gamma_r * penalty_r.
inline double log_joint(const SamplerState& st, const Dataset& d, const Hyperparams& hp,
                        const ConstraintSpec& spec) {
    const double p1 = hp.prior_truth();
    std::size_t n_true = 0;
    for (auto l : st.labels) n_true += l;
    double lj = static_cast<double>(n_true) * std::log(p1) +
                static_cast<double>(d.num_facts() - n_true) * std::log(1.0 - p1);

    for (std::uint32_t s = 0; s < d.num_sources(); ++s) {
        const GammaPrior& gp = hp.prior_for(d.sources[s].signal);
        lj += gamma_log_pdf(st.rates[s].lambda0, gp.kappa0, gp.mu0);
        lj += gamma_log_pdf(st.rates[s].lambda1, gp.kappa1, gp.mu1);
    }

    for (const Extraction& x : d.extractions) {
        const SourceRates& r = st.rates[x.source];
        const double lam = st.labels[x.fact] ? r.lambda1 : r.lambda0;
        const double loglam = st.labels[x.fact] ? r.log_lambda1 : r.log_lambda0;
        lj += static_cast<double>(x.count) * loglam - lam - log_gamma(static_cast<double>(x.count) + 1.0);
    }

    for (int r = 0; r < kNumRules; ++r) {
        if (spec.active(static_cast<Rule>(r))) {
            lj -= hp.gamma[r] * static_cast<double>(st.counts.penalty[r]);
        }
    }
    return lj;
}

struct ChainDiagnostics {
    std::uint64_t sweeps = 0;
    std::vector<double> log_joint_trace;  // one entry per retained sample
};

/// Posterior estimates merged over chains. `sources` mirrors the
/// dataset's source list so reports can be produced from the summary
/// alone.
struct PosteriorSummary {
    std::vector<double> trust;  // per fact: posterior mean of l_f
    Labeling predicted;         // trust > threshold
    std::vector<double> lambda0_mean, lambda1_mean;
    std::vector<double> reliability;  // mean(lambda1) / (mean(lambda0) + mean(lambda1))
    std::vector<PatternSource> sources;
    double threshold = 0.5;
    std::vector<ChainDiagnostics> chain_diagnostics;
};

namespace inf_detail {

struct ChainAccum {
    std::vector<std::uint64_t> label_sum;
    std::vector<double> l0_sum, l1_sum;
    ChainDiagnostics diag;
};

inline ChainAccum run_chain(const Dataset& d, const Hyperparams& hp, const ConstraintSpec& spec,
                            const RunConfig& cfg, std::uint64_t chain_seed) {
    SamplerState st = init_state(d, hp, spec, chain_seed);
    ChainAccum acc;
    acc.label_sum.assign(d.num_facts(), 0);
    acc.l0_sum.assign(d.num_sources(), 0.0);
    acc.l1_sum.assign(d.num_sources(), 0.0);
    acc.diag.log_joint_trace.reserve(cfg.samples);

    for (std::uint32_t i = 0; i < cfg.burn_in; ++i) gibbs_sweep(st, d, hp, spec);
    for (std::uint32_t s = 0; s < cfg.samples; ++s) {
        for (std::uint32_t t = 0; t < cfg.thinning; ++t) gibbs_sweep(st, d, hp, spec);
        for (std::uint32_t f = 0; f < d.num_facts(); ++f) acc.label_sum[f] += st.labels[f];
        for (std::uint32_t p = 0; p < d.num_sources(); ++p) {
            acc.l0_sum[p] += st.rates[p].lambda0;
            acc.l1_sum[p] += st.rates[p].lambda1;
        }
        acc.diag.log_joint_trace.push_back(log_joint(st, d, hp, spec));
    }
    acc.diag.sweeps = cfg.burn_in + static_cast<std::uint64_t>(cfg.samples) * cfg.thinning;
    return acc;
}

}  // namespace inf_detail

/// Runs `cfg.chains` independent chains (concurrently when more than one)
/// and merges them in chain index order, so the result is a deterministic
/// function of the inputs.
inline PosteriorSummary run(const Dataset& d, const Hyperparams& hp, const ConstraintSpec& spec,
                            const RunConfig& cfg) {
    hp.validate();
    cfg.validate();
    if (d.num_facts() == 0) throw std::invalid_argument("cannot sample an empty dataset");

    std::vector<inf_detail::ChainAccum> accums(cfg.chains);
    if (cfg.chains == 1) {
        accums[0] = inf_detail::run_chain(d, hp, spec, cfg, derive_seed(cfg.seed, 0x7464ULL));
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(cfg.chains);
        for (std::uint32_t k = 0; k < cfg.chains; ++k) {
            workers.emplace_back([&, k] {
                try {
                    accums[k] = inf_detail::run_chain(d, hp, spec, cfg, derive_seed(cfg.seed, 0x7464ULL + k));
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    PosteriorSummary out;
    out.threshold = cfg.threshold;
    out.sources = d.sources;
    out.trust.assign(d.num_facts(), 0.0);
    out.lambda0_mean.assign(d.num_sources(), 0.0);
    out.lambda1_mean.assign(d.num_sources(), 0.0);
    const double denom = static_cast<double>(cfg.chains) * cfg.samples;
    for (const auto& acc : accums) {
        for (std::uint32_t f = 0; f < d.num_facts(); ++f) {
            out.trust[f] += static_cast<double>(acc.label_sum[f]);
        }
        for (std::uint32_t p = 0; p < d.num_sources(); ++p) {
            out.lambda0_mean[p] += acc.l0_sum[p];
            out.lambda1_mean[p] += acc.l1_sum[p];
        }
        out.chain_diagnostics.push_back(acc.diag);
    }
    for (auto& t : out.trust) t /= denom;
    out.predicted.resize(d.num_facts());
    for (std::uint32_t f = 0; f < d.num_facts(); ++f) {
        out.predicted[f] = out.trust[f] > cfg.threshold ? 1 : 0;
    }
    out.reliability.resize(d.num_sources());
    for (std::uint32_t p = 0; p < d.num_sources(); ++p) {
        out.lambda0_mean[p] /= denom;
        out.lambda1_mean[p] /= denom;
        out.reliability[p] = out.lambda1_mean[p] / (out.lambda0_mean[p] + out.lambda1_mean[p]);
    }
    return out;
}

/// One row per pattern text, joining its post and tag reliability when
/// both signal variants exist.
struct ReliabilityRow {
    std::string pattern;
    std::optional<double> r_post, r_tag;

    double max_r() const {
        return std::max(r_post.value_or(-1.0), r_tag.value_or(-1.0));
    }
};

inline std::vector<ReliabilityRow> pattern_reliability_report(const PosteriorSummary& summary) {
    std::vector<ReliabilityRow> rows;
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t s = 0; s < summary.sources.size(); ++s) {
        const PatternSource& src = summary.sources[s];
        auto [it, is_new] = row_of.try_emplace(src.pattern, rows.size());
        if (is_new) rows.push_back({src.pattern, std::nullopt, std::nullopt});
        ReliabilityRow& row = rows[it->second];
        if (src.signal == SignalType::post) {
            row.r_post = summary.reliability[s];
        } else {
            row.r_tag = summary.reliability[s];
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ReliabilityRow& a, const ReliabilityRow& b) {
        if (a.max_r() != b.max_r()) return a.max_r() > b.max_r();
        return a.pattern < b.pattern;
    });
    return rows;
}

}  // namespace ttd
