#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ttd/types.hpp"

namespace ttd {

struct DatasetOptions {
    int time_min = 1000;
    int time_max = 3000;
};

struct RecordError {
    std::size_t index = 0;  // position in the input record list
    std::size_t line = 0;   // source line, when the reader supplied one
    std::string reason;
};

struct BuildReport {
    std::vector<RecordError> rejected;
    std::size_t accepted = 0;
    std::size_t merged = 0;  // records folded into an existing (fact, source) pair
};

namespace detail {
inline std::string fact_key(std::string_view e, std::string_view v, long long t) {
    std::string k;
    k.reserve(e.size() + v.size() + 24);
    k.append(e);
    k.push_back('\x1f');
    k.append(v);
    k.push_back('\x1f');
    k.append(std::to_string(t));
    return k;
}

inline std::string source_key(std::string_view pattern, SignalType s) {
    std::string k;
    k.reserve(pattern.size() + 2);
    k.append(pattern);
    k.push_back('\x1f');
    k.push_back(s == SignalType::post ? 'p' : 't');
    return k;
}

inline std::uint64_t id_pair_key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

inline std::uint64_t id_time_key(std::uint32_t a, int t) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(t);
}
}  // namespace detail

/// The immutable extraction graph plus every index inference needs:
/// fact/source adjacency and the constraint-group structure for C1-C4.
/// Construct via build_dataset or from_parts; treat as read-only after.
class Dataset {
public:
    std::vector<Fact> facts;
    std::vector<PatternSource> sources;
    std::vector<Extraction> extractions;

    // dense ids per fact
    std::vector<std::uint32_t> fact_entity, fact_value;
    std::vector<std::uint32_t> fact_pair;  // (entity, value) pair id
    std::vector<std::uint32_t> fact_g4;    // (entity, time) group id
    std::vector<std::uint32_t> fact_g3;    // (value, time) group id

    std::vector<std::string> entity_names, value_names;
    std::vector<std::uint32_t> pair_entity, pair_value;
    std::vector<std::uint32_t> g4_entity, g3_value;
    std::vector<int> g4_time, g3_time;

    // adjacency: fact/source -> extraction indices, group -> fact ids,
    // value/entity -> (entity, value) pair ids
    Csr fact_edges, source_edges;
    Csr g4_facts, g3_facts;
    Csr value_pairs, entity_pairs;

    std::size_t num_facts() const { return facts.size(); }
    std::size_t num_sources() const { return sources.size(); }
    std::size_t num_entities() const { return entity_names.size(); }
    std::size_t num_values() const { return value_names.size(); }
    std::size_t num_pairs() const { return pair_entity.size(); }
    std::size_t num_g4() const { return g4_entity.size(); }
    std::size_t num_g3() const { return g3_value.size(); }

    std::optional<std::uint32_t> find_entity(std::string_view name) const {
        auto it = entity_ids_.find(std::string(name));
        if (it == entity_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::uint32_t> find_value(std::string_view name) const {
        auto it = value_ids_.find(std::string(name));
        if (it == value_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::uint32_t> find_fact(std::string_view e, std::string_view v, int t) const {
        auto it = fact_ids_.find(detail::fact_key(e, v, t));
        if (it == fact_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::uint32_t> find_source(std::string_view pattern, SignalType s) const {
        auto it = source_ids_.find(detail::source_key(pattern, s));
        if (it == source_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::uint32_t> find_g4(std::string_view entity, int t) const {
        auto e = find_entity(entity);
        if (!e) return std::nullopt;
        auto it = g4_ids_.find(detail::id_time_key(*e, t));
        if (it == g4_ids_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::uint32_t> find_g3(std::string_view value, int t) const {
        auto v = find_value(value);
        if (!v) return std::nullopt;
        auto it = g3_ids_.find(detail::id_time_key(*v, t));
        if (it == g3_ids_.end()) return std::nullopt;
        return it->second;
    }

    /// Assembles a dataset from already-deduplicated parts. Fact triples and
    /// (pattern, signal) pairs must be unique; at most one extraction per
    /// (fact, source) pair; every index in range.
    static Dataset from_parts(std::vector<Fact> facts, std::vector<PatternSource> sources,
                              std::vector<Extraction> extractions) {
        Dataset d;
        d.facts = std::move(facts);
        d.sources = std::move(sources);
        d.extractions = std::move(extractions);
        for (const auto& x : d.extractions) {
            if (x.fact >= d.facts.size() || x.source >= d.sources.size()) {
                throw std::invalid_argument("extraction references an unknown fact or source");
            }
            if (x.count < 1) throw std::invalid_argument("extraction count must be >= 1");
        }
        d.finalize();
        return d;
    }

    /// Structural equality on the primary collections; all indices are a
    /// deterministic function of these.
    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.facts == b.facts && a.sources == b.sources && a.extractions == b.extractions;
    }

private:
    std::unordered_map<std::string, std::uint32_t> entity_ids_, value_ids_, fact_ids_, source_ids_;
    std::unordered_map<std::uint64_t, std::uint32_t> g4_ids_, g3_ids_, pair_ids_;

    friend Dataset build_dataset(const std::vector<ExtractionRecord>&, const DatasetOptions&, BuildReport*);

    void finalize() {
        const auto nf = static_cast<std::uint32_t>(facts.size());
        fact_entity.resize(nf);
        fact_value.resize(nf);
        fact_pair.resize(nf);
        fact_g4.resize(nf);
        fact_g3.resize(nf);

        std::vector<std::pair<std::uint32_t, std::uint32_t>> g4_members, g3_members;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> v_pairs, e_pairs;

        for (std::uint32_t f = 0; f < nf; ++f) {
            const Fact& fact = facts[f];
            auto [eit, enew] = entity_ids_.try_emplace(fact.entity, static_cast<std::uint32_t>(entity_names.size()));
            if (enew) entity_names.push_back(fact.entity);
            auto [vit, vnew] = value_ids_.try_emplace(fact.value, static_cast<std::uint32_t>(value_names.size()));
            if (vnew) value_names.push_back(fact.value);
            const std::uint32_t e = eit->second, v = vit->second;
            fact_entity[f] = e;
            fact_value[f] = v;
            fact_ids_.emplace(detail::fact_key(fact.entity, fact.value, fact.time), f);

            auto [pit, pnew] = pair_ids_.try_emplace(detail::id_pair_key(e, v), static_cast<std::uint32_t>(pair_entity.size()));
            if (pnew) {
                pair_entity.push_back(e);
                pair_value.push_back(v);
                v_pairs.emplace_back(v, pit->second);
                e_pairs.emplace_back(e, pit->second);
            }
            fact_pair[f] = pit->second;

            auto [g4it, g4new] = g4_ids_.try_emplace(detail::id_time_key(e, fact.time), static_cast<std::uint32_t>(g4_entity.size()));
            if (g4new) {
                g4_entity.push_back(e);
                g4_time.push_back(fact.time);
            }
            fact_g4[f] = g4it->second;
            g4_members.emplace_back(g4it->second, f);

            auto [g3it, g3new] = g3_ids_.try_emplace(detail::id_time_key(v, fact.time), static_cast<std::uint32_t>(g3_value.size()));
            if (g3new) {
                g3_value.push_back(v);
                g3_time.push_back(fact.time);
            }
            fact_g3[f] = g3it->second;
            g3_members.emplace_back(g3it->second, f);
        }

        for (std::uint32_t s = 0; s < sources.size(); ++s) {
            source_ids_.emplace(detail::source_key(sources[s].pattern, sources[s].signal), s);
        }

        std::vector<std::pair<std::uint32_t, std::uint32_t>> f_edges, s_edges;
        f_edges.reserve(extractions.size());
        s_edges.reserve(extractions.size());
        for (std::uint32_t x = 0; x < extractions.size(); ++x) {
            f_edges.emplace_back(extractions[x].fact, x);
            s_edges.emplace_back(extractions[x].source, x);
        }
        fact_edges = make_csr(facts.size(), f_edges);
        source_edges = make_csr(sources.size(), s_edges);
        g4_facts = make_csr(g4_entity.size(), g4_members);
        g3_facts = make_csr(g3_value.size(), g3_members);
        value_pairs = make_csr(value_names.size(), v_pairs);
        entity_pairs = make_csr(entity_names.size(), e_pairs);
    }
};

/// Validates and deduplicates raw records into a Dataset. Duplicate
/// (fact, source) records merge by summing counts; indices follow
/// first-appearance order. Bad records are skipped and reported.
inline Dataset build_dataset(const std::vector<ExtractionRecord>& records,
                             const DatasetOptions& options = {},
                             BuildReport* report = nullptr) {
    Dataset d;
    std::unordered_map<std::string, std::uint32_t> fact_ids, source_ids;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_ids;  // (fact, source) -> extraction

    BuildReport local;
    BuildReport& rep = report ? *report : local;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const ExtractionRecord& r = records[i];
        auto reject = [&](std::string reason) {
            rep.rejected.push_back({i, r.line, std::move(reason)});
        };
        if (r.entity.empty() || r.value.empty() || r.pattern.empty()) {
            reject("empty entity, value, or pattern field");
            continue;
        }
        const auto signal = parse_signal(r.signal);
        if (!signal) {
            reject("unknown signal \"" + r.signal + "\" (expected \"post\" or \"tag\")");
            continue;
        }
        if (r.count < 1) {
            reject("count < 1");
            continue;
        }
        if (r.time < options.time_min || r.time > options.time_max) {
            reject("time " + std::to_string(r.time) + " outside accepted range [" +
                   std::to_string(options.time_min) + ", " + std::to_string(options.time_max) + "]");
            continue;
        }

        auto [fit, fnew] = fact_ids.try_emplace(detail::fact_key(r.entity, r.value, r.time),
                                                static_cast<std::uint32_t>(d.facts.size()));
        if (fnew) d.facts.push_back({r.entity, r.value, static_cast<int>(r.time)});
        auto [sit, snew] = source_ids.try_emplace(detail::source_key(r.pattern, *signal),
                                                  static_cast<std::uint32_t>(d.sources.size()));
        if (snew) d.sources.push_back({r.pattern, *signal});

        auto [xit, xnew] = edge_ids.try_emplace(detail::id_pair_key(fit->second, sit->second),
                                                static_cast<std::uint32_t>(d.extractions.size()));
        if (xnew) {
            d.extractions.push_back({fit->second, sit->second, static_cast<std::uint64_t>(r.count)});
        } else {
            d.extractions[xit->second].count += static_cast<std::uint64_t>(r.count);
            rep.merged++;
        }
        rep.accepted++;
    }

    d.finalize();
    return d;
}

/// Serializes a dataset back to wire records, one per extraction, in
/// extraction index order. Rebuilding from this output reproduces the
/// dataset exactly (facts carried only by their extractions).
inline std::vector<ExtractionRecord> to_records(const Dataset& d) {
    std::vector<ExtractionRecord> out;
    out.reserve(d.extractions.size());
    for (const auto& x : d.extractions) {
        const Fact& f = d.facts[x.fact];
        const PatternSource& p = d.sources[x.source];
        out.push_back({f.entity, f.value, f.time, p.pattern, std::string(to_string(p.signal)),
                       static_cast<long long>(x.count), 0});
    }
    return out;
}

}  // namespace ttd
