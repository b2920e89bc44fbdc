#pragma once

// Shared fixtures and independent oracles for the test suite. Oracles here
// deliberately avoid the library's index machinery: they scan the raw fact
// list so they can catch indexing bugs.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ttd/constraints.hpp"
#include "ttd/dataset.hpp"
#include "ttd/rng.hpp"
#include "ttd/types.hpp"

namespace ttest {

using namespace ttd;

/// The four labeled introduction tuples: P1/tag and P2/post are right,
/// the other two signal pairings are wrong.
inline std::vector<ExtractionRecord> intro_records() {
    return {
        {"France", "Jacques Chirac", 1995, "P1", "tag", 1, 1},
        {"France", "Jacques Chirac", 2019, "P1", "post", 1, 2},
        {"France", "Emmanuel Macron", 2004, "P2", "tag", 1, 3},
        {"France", "Emmanuel Macron", 2019, "P2", "post", 1, 4},
    };
}

/// Correct labels for intro_records in build order.
inline Labeling intro_truth() { return {1, 0, 0, 1}; }

// ---- brute-force constraint oracles (naive scans over the fact list) ----

inline std::uint32_t brute_c4(const Dataset& d, const Labeling& l, const std::string& entity, int time) {
    std::uint32_t c = 0;
    for (std::size_t f = 0; f < d.num_facts(); ++f) {
        if (l[f] && d.facts[f].entity == entity && d.facts[f].time == time) c++;
    }
    return c;
}

inline std::uint32_t brute_c3(const Dataset& d, const Labeling& l, const std::string& value, int time) {
    std::uint32_t c = 0;
    for (std::size_t f = 0; f < d.num_facts(); ++f) {
        if (l[f] && d.facts[f].value == value && d.facts[f].time == time) c++;
    }
    return c;
}

inline std::uint32_t brute_c1(const Dataset& d, const Labeling& l, const std::string& value) {
    std::set<std::string> entities;
    for (std::size_t f = 0; f < d.num_facts(); ++f) {
        if (l[f] && d.facts[f].value == value) entities.insert(d.facts[f].entity);
    }
    return static_cast<std::uint32_t>(entities.size());
}

inline std::uint32_t brute_c2(const Dataset& d, const Labeling& l, const std::string& entity) {
    std::set<std::string> values;
    for (std::size_t f = 0; f < d.num_facts(); ++f) {
        if (l[f] && d.facts[f].entity == entity) values.insert(d.facts[f].value);
    }
    return static_cast<std::uint32_t>(values.size());
}

/// Reference constraint_counts_all built purely from the fact strings.
/// Keyed by rule + a readable group key.
inline std::map<std::pair<int, std::string>, std::uint32_t> brute_counts_all(const Dataset& d,
                                                                             const Labeling& l,
                                                                             const ConstraintSpec& spec) {
    std::map<std::pair<int, std::string>, std::uint32_t> out;
    std::set<std::string> values, entities;
    std::set<std::pair<std::string, int>> vt, et;
    for (const Fact& f : d.facts) {
        values.insert(f.value);
        entities.insert(f.entity);
        vt.insert({f.value, f.time});
        et.insert({f.entity, f.time});
    }
    if (spec.c1) {
        for (const auto& v : values) out[{0, v}] = brute_c1(d, l, v);
    }
    if (spec.c2) {
        for (const auto& e : entities) out[{1, e}] = brute_c2(d, l, e);
    }
    if (spec.c3) {
        for (const auto& [v, t] : vt) out[{2, v + "@" + std::to_string(t)}] = brute_c3(d, l, v, t);
    }
    if (spec.c4) {
        for (const auto& [e, t] : et) out[{3, e + "@" + std::to_string(t)}] = brute_c4(d, l, e, t);
    }
    return out;
}

inline std::uint64_t brute_penalty(const std::map<std::pair<int, std::string>, std::uint32_t>& counts) {
    std::uint64_t p = 0;
    for (const auto& [_, c] : counts) {
        if (c > 1) p += c - 1;
    }
    return p;
}

/// Library counts re-keyed the same way as brute_counts_all, for map
/// equality checks.
inline std::map<std::pair<int, std::string>, std::uint32_t> rekey_counts(const Dataset& d,
                                                                         const ConstraintCountMap& counts) {
    std::map<std::pair<int, std::string>, std::uint32_t> out;
    for (const auto& [ref, c] : counts) {
        std::string key;
        switch (ref.rule) {
            case Rule::c1: key = d.value_names[ref.id]; break;
            case Rule::c2: key = d.entity_names[ref.id]; break;
            case Rule::c3: key = d.value_names[d.g3_value[ref.id]] + "@" + std::to_string(d.g3_time[ref.id]); break;
            case Rule::c4: key = d.entity_names[d.g4_entity[ref.id]] + "@" + std::to_string(d.g4_time[ref.id]); break;
        }
        out[{static_cast<int>(ref.rule), key}] = c;
    }
    return out;
}

// ---- random instance generation ----

inline std::vector<ExtractionRecord> random_records(Rng& rng, int target_records, int entities,
                                                    int values, int years, int patterns) {
    std::vector<ExtractionRecord> recs;
    for (int i = 0; i < target_records; ++i) {
        ExtractionRecord r;
        r.entity = "E" + std::to_string(rng.uniform_int(entities));
        r.value = "V" + std::to_string(rng.uniform_int(values));
        r.time = 2000 + static_cast<int>(rng.uniform_int(years));
        r.pattern = "P" + std::to_string(rng.uniform_int(patterns));
        r.signal = rng.bernoulli(0.5) ? "post" : "tag";
        r.count = 1 + static_cast<long long>(rng.uniform_int(5));
        r.line = static_cast<std::size_t>(i) + 1;
        recs.push_back(std::move(r));
    }
    return recs;
}

inline Labeling random_labels(Rng& rng, std::size_t n, double p = 0.5) {
    Labeling l(n);
    for (auto& x : l) x = rng.bernoulli(p) ? 1 : 0;
    return l;
}

}  // namespace ttest
