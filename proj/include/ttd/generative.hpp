#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "ttd/dataset.hpp"
#include "ttd/params.hpp"
#include "ttd/rng.hpp"
#include "ttd/types.hpp"

namespace ttd {

/// Forward-simulation settings. `prior` supplies both the Beta prior on
/// fact trustworthiness and the Gamma priors the per-source rates are
/// drawn from (its constraint strengths are unused here; planting is what
/// realizes `plant`). Per-source degrees follow Poisson(mean_facts_per_source),
/// clamped to at least one fact.
struct GenConfig {
    std::uint32_t num_entities = 20;
    std::uint32_t num_values = 100;
    int time_min = 2000;
    int time_max = 2019;
    std::uint32_t num_facts = 500;
    std::uint32_t sources_per_signal = 25;  // pattern count; each pattern appears with both signals
    double mean_facts_per_source = 20.0;
    Hyperparams prior;
    ConstraintSpec plant;
    bool zero_truncated = false;  // keep every edge, drawing counts from a zero-truncated Poisson
    std::uint64_t seed = 0;

    int num_years() const { return time_max - time_min + 1; }

    void validate() const {
        if (num_entities < 1 || num_values < 1 || num_facts < 1 || sources_per_signal < 1) {
            throw std::invalid_argument("generator counts must be positive");
        }
        if (time_max < time_min) throw std::invalid_argument("empty time span");
        if (!(mean_facts_per_source > 0)) throw std::invalid_argument("mean_facts_per_source must be positive");
        const double universe = static_cast<double>(num_entities) * num_values * num_years();
        if (static_cast<double>(num_facts) > universe) {
            throw std::invalid_argument("num_facts exceeds the (entity, value, time) universe");
        }
        prior.validate();
    }
};

/// One sampled (fact, source) edge with its drawn count, recorded before
/// zero counts are dropped.
struct RawEdge {
    std::uint32_t fact = 0;
    std::uint32_t source = 0;
    std::uint64_t count = 0;
};

/// Everything the generator knows that inference has to recover.
struct PlantedTruth {
    Labeling labels;
    std::vector<double> theta;              // per fact
    std::vector<double> lambda0, lambda1;   // per source
    std::vector<RawEdge> raw_edges;         // every drawn edge, zero counts included
};

struct Generated {
    Dataset dataset;
    PlantedTruth truth;
};

namespace gen_detail {

inline std::string seq_name(char prefix, std::uint32_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%04u", prefix, i);
    return buf;
}

struct IdFact {
    std::uint32_t entity, value;
    int time;
};

inline std::uint64_t triple_key(const IdFact& f) {
    return (static_cast<std::uint64_t>(f.entity) << 40) ^ (static_cast<std::uint64_t>(f.value) << 16) ^
           static_cast<std::uint32_t>(f.time + 32768);
}

struct Universe {
    std::vector<IdFact> facts;
    Labeling labels;
    std::vector<double> theta;
};

/// Builds per-entity timelines that satisfy the active rules, then labels
/// a sample of the resulting world facts true and pads the pool with
/// false claims (value swaps, year shifts, random triples).
inline Universe build_constrained(const GenConfig& cfg, Rng& rng) {
    constexpr int kAttempts = 50;
    const double p_stay = 0.8;

    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        std::vector<std::int64_t> value_owner(cfg.num_values, -1);   // C1/C3 bookkeeping
        std::vector<std::int64_t> entity_value(cfg.num_entities, -1);  // C2
        std::unordered_set<std::uint64_t> vt_claimed;                  // C3

        auto vt_key = [](std::uint32_t v, int t) {
            return (static_cast<std::uint64_t>(v) << 20) ^ static_cast<std::uint32_t>(t + 32768);
        };
        auto admissible = [&](std::uint32_t e, std::uint32_t v, int t) {
            if (cfg.plant.c1 && value_owner[v] >= 0 && value_owner[v] != static_cast<std::int64_t>(e)) return false;
            if (cfg.plant.c2 && entity_value[e] >= 0 && entity_value[e] != static_cast<std::int64_t>(v)) return false;
            if (cfg.plant.c3 && vt_claimed.count(vt_key(v, t))) return false;
            return true;
        };
        auto claim = [&](std::uint32_t e, std::uint32_t v, int t) {
            value_owner[v] = e;
            entity_value[e] = v;
            vt_claimed.insert(vt_key(v, t));
        };

        std::vector<IdFact> world;
        for (std::uint32_t e = 0; e < cfg.num_entities; ++e) {
            std::int64_t cur = -1;
            for (int t = cfg.time_min; t <= cfg.time_max; ++t) {
                if (cur >= 0 && rng.uniform() < p_stay && admissible(e, static_cast<std::uint32_t>(cur), t)) {
                    claim(e, static_cast<std::uint32_t>(cur), t);
                    world.push_back({e, static_cast<std::uint32_t>(cur), t});
                    continue;
                }
                cur = -1;
                for (int tries = 0; tries < 30; ++tries) {
                    const auto v = static_cast<std::uint32_t>(rng.uniform_int(cfg.num_values));
                    if (admissible(e, v, t)) {
                        claim(e, v, t);
                        world.push_back({e, v, t});
                        cur = v;
                        break;
                    }
                }
            }
        }
        if (world.empty()) continue;

        std::shuffle(world.begin(), world.end(), rng.engine());
        const auto want_true = static_cast<std::size_t>(cfg.prior.prior_truth() * cfg.num_facts + 0.5);
        const std::size_t num_true = std::min(std::max<std::size_t>(want_true, 1), std::min<std::size_t>(world.size(), cfg.num_facts));

        Universe u;
        std::unordered_set<std::uint64_t> taken;
        for (std::size_t i = 0; i < num_true; ++i) {
            u.facts.push_back(world[i]);
            taken.insert(triple_key(world[i]));
        }

        bool stuck = false;
        while (u.facts.size() < cfg.num_facts) {
            IdFact cand{};
            bool have = false;
            for (int tries = 0; tries < 200 && !have; ++tries) {
                if (rng.uniform() < 0.6) {
                    // perturb a true fact into a competing claim
                    const IdFact& base = u.facts[rng.uniform_int(num_true)];
                    cand = base;
                    if (rng.uniform() < 0.5) {
                        cand.value = static_cast<std::uint32_t>(rng.uniform_int(cfg.num_values));
                    } else {
                        const int shift = 1 + static_cast<int>(rng.uniform_int(4));
                        cand.time = base.time + (rng.uniform() < 0.5 ? shift : -shift);
                        if (cand.time < cfg.time_min || cand.time > cfg.time_max) continue;
                    }
                } else {
                    cand = {static_cast<std::uint32_t>(rng.uniform_int(cfg.num_entities)),
                            static_cast<std::uint32_t>(rng.uniform_int(cfg.num_values)),
                            cfg.time_min + static_cast<int>(rng.uniform_int(cfg.num_years()))};
                }
                have = !taken.count(triple_key(cand));
            }
            if (!have) {
                stuck = true;
                break;
            }
            taken.insert(triple_key(cand));
            u.facts.push_back(cand);
        }
        if (stuck) continue;

        u.labels.assign(u.facts.size(), 0);
        std::fill(u.labels.begin(), u.labels.begin() + num_true, 1);

        // decorrelate label from fact index
        std::vector<std::uint32_t> perm(u.facts.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng.engine());
        std::vector<IdFact> pf(u.facts.size());
        Labeling pl(u.facts.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            pf[i] = u.facts[perm[i]];
            pl[i] = u.labels[perm[i]];
        }
        u.facts = std::move(pf);
        u.labels = std::move(pl);
        return u;
    }
    throw std::runtime_error("could not plant a constraint-satisfying truth for this configuration");
}

inline Universe build_universe(const GenConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, 0));
    Universe u;
    if (cfg.plant.any()) {
        u = build_constrained(cfg, rng);
    } else {
        std::unordered_set<std::uint64_t> taken;
        while (u.facts.size() < cfg.num_facts) {
            IdFact cand = {static_cast<std::uint32_t>(rng.uniform_int(cfg.num_entities)),
                           static_cast<std::uint32_t>(rng.uniform_int(cfg.num_values)),
                           cfg.time_min + static_cast<int>(rng.uniform_int(cfg.num_years()))};
            if (taken.insert(triple_key(cand)).second) u.facts.push_back(cand);
        }
    }

    u.theta.resize(u.facts.size());
    for (double& th : u.theta) th = rng.beta(cfg.prior.beta1, cfg.prior.beta0);
    if (!cfg.plant.any()) {
        u.labels.resize(u.facts.size());
        for (std::size_t f = 0; f < u.facts.size(); ++f) u.labels[f] = rng.bernoulli(u.theta[f]) ? 1 : 0;
    }
    return u;
}

inline std::vector<std::uint32_t> pick_distinct(Rng& rng, std::uint32_t n, std::uint32_t k) {
    if (3ULL * k >= n) {
        std::vector<std::uint32_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::uint32_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::uint32_t>(rng.uniform_int(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }
    std::unordered_set<std::uint32_t> seen;
    std::vector<std::uint32_t> out;
    out.reserve(k);
    while (out.size() < k) {
        const auto u = static_cast<std::uint32_t>(rng.uniform_int(n));
        if (seen.insert(u).second) out.push_back(u);
    }
    return out;
}

}  // namespace gen_detail

/// The labeling sample_generative would plant for this config. Requires a
/// nonempty constraint spec; the result has zero violation penalty.
inline Labeling plant_constrained_truth(const GenConfig& cfg) {
    cfg.validate();
    if (!cfg.plant.any()) {
        throw std::invalid_argument("plant_constrained_truth requires a nonempty constraint spec");
    }
    return gen_detail::build_universe(cfg).labels;
}

/// Runs the generative process: draw fact trustworthiness and labels,
/// per-source rates, a random bipartite fact-source topology (every fact
/// covered at least once), and per-edge Poisson counts. Zero-count edges
/// are dropped unless cfg.zero_truncated keeps all edges with counts
/// drawn from a zero-truncated Poisson. Deterministic given cfg.seed.
inline Generated sample_generative(const GenConfig& cfg) {
    cfg.validate();
    gen_detail::Universe u = gen_detail::build_universe(cfg);
    const auto nf = static_cast<std::uint32_t>(u.facts.size());
    const std::uint32_t ns = cfg.sources_per_signal * 2;

    PlantedTruth truth;
    truth.labels = u.labels;
    truth.theta = std::move(u.theta);
    truth.lambda0.resize(ns);
    truth.lambda1.resize(ns);

    std::vector<PatternSource> sources(ns);
    Rng rng_rates(derive_seed(cfg.seed, 1));
    for (std::uint32_t p = 0; p < cfg.sources_per_signal; ++p) {
        for (int sig = 0; sig < kNumSignals; ++sig) {
            const std::uint32_t s = 2 * p + sig;
            sources[s] = {gen_detail::seq_name('P', p), static_cast<SignalType>(sig)};
            const GammaPrior& gp = cfg.prior.rate_prior[sig];
            truth.lambda0[s] = rng_rates.gamma(gp.kappa0, gp.mu0);
            truth.lambda1[s] = rng_rates.gamma(gp.kappa1, gp.mu1);
        }
    }

    // topology: per-source Poisson degree, then cover facts nothing picked
    Rng rng_topo(derive_seed(cfg.seed, 2));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (fact, source)
    std::vector<std::uint8_t> covered(nf, 0);
    for (std::uint32_t s = 0; s < ns; ++s) {
        auto deg = static_cast<std::uint32_t>(rng_topo.poisson(cfg.mean_facts_per_source));
        deg = std::clamp<std::uint32_t>(deg, 1, nf);
        for (std::uint32_t f : gen_detail::pick_distinct(rng_topo, nf, deg)) {
            edges.emplace_back(f, s);
            covered[f] = 1;
        }
    }
    for (std::uint32_t f = 0; f < nf; ++f) {
        if (!covered[f]) edges.emplace_back(f, static_cast<std::uint32_t>(rng_topo.uniform_int(ns)));
    }

    Rng rng_counts(derive_seed(cfg.seed, 3));
    std::vector<Extraction> kept;
    truth.raw_edges.reserve(edges.size());
    for (const auto& [f, s] : edges) {
        const double rate = truth.labels[f] ? truth.lambda1[s] : truth.lambda0[s];
        const std::uint64_t o = cfg.zero_truncated ? rng_counts.poisson_positive(rate) : rng_counts.poisson(rate);
        truth.raw_edges.push_back({f, s, o});
        if (o >= 1) kept.push_back({f, s, o});
    }
    if (kept.empty()) {
        throw std::runtime_error("generative config produced zero extractions");
    }

    std::vector<Fact> facts(nf);
    for (std::uint32_t f = 0; f < nf; ++f) {
        facts[f] = {gen_detail::seq_name('E', u.facts[f].entity), gen_detail::seq_name('V', u.facts[f].value),
                    u.facts[f].time};
    }

    Generated out{Dataset::from_parts(std::move(facts), std::move(sources), std::move(kept)), std::move(truth)};
    return out;
}

}  // namespace ttd
