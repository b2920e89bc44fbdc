#pragma once

#include <cstdint>
#include <map>
#include <string_view>

#include "ttd/dataset.hpp"
#include "ttd/types.hpp"

namespace ttd {

/// Number of true facts sharing (entity, time). Unknown keys count zero.
inline std::uint32_t constraint_count_c4(const Dataset& d, const Labeling& labels,
                                         std::string_view entity, int time) {
    const auto g = d.find_g4(entity, time);
    if (!g) return 0;
    std::uint32_t c = 0;
    auto [begin, end] = d.g4_facts.row(*g);
    for (auto it = begin; it != end; ++it) c += labels[*it];
    return c;
}

/// Number of distinct entities that hold at least one true fact under
/// `value`. Unknown values count zero.
inline std::uint32_t constraint_count_c1(const Dataset& d, const Labeling& labels,
                                         std::string_view value) {
    const auto v = d.find_value(value);
    if (!v) return 0;
    std::vector<std::uint8_t> pair_on(d.num_pairs(), 0);
    for (std::uint32_t f = 0; f < d.num_facts(); ++f) {
        if (labels[f] && d.fact_value[f] == *v) pair_on[d.fact_pair[f]] = 1;
    }
    std::uint32_t c = 0;
    auto [pbegin, pend] = d.value_pairs.row(*v);
    for (auto pit = pbegin; pit != pend; ++pit) c += pair_on[*pit];
    return c;
}

/// Identifies one constraint group: the rule plus the dataset's dense
/// group id under that rule (value id for C1, entity id for C2,
/// (value, time) group for C3, (entity, time) group for C4).
struct GroupRef {
    Rule rule;
    std::uint32_t id;

    friend auto operator<=>(const GroupRef&, const GroupRef&) = default;
};

using ConstraintCountMap = std::map<GroupRef, std::uint32_t>;

/// One count per active rule per group key. C3/C4 use the raw true-label
/// sum over the group; C1/C2 use the distinct-partner indicator sum.
inline ConstraintCountMap constraint_counts_all(const Dataset& d, const Labeling& labels,
                                                const ConstraintSpec& spec) {
    ConstraintCountMap out;
    std::vector<std::uint32_t> pair_true;
    if (spec.c1 || spec.c2) {
        pair_true.assign(d.num_pairs(), 0);
        for (std::uint32_t f = 0; f < d.num_facts(); ++f) {
            if (labels[f]) pair_true[d.fact_pair[f]]++;
        }
    }
    if (spec.c1) {
        for (std::uint32_t v = 0; v < d.num_values(); ++v) {
            std::uint32_t c = 0;
            auto [begin, end] = d.value_pairs.row(v);
            for (auto it = begin; it != end; ++it) c += pair_true[*it] > 0;
            out[{Rule::c1, v}] = c;
        }
    }
    if (spec.c2) {
        for (std::uint32_t e = 0; e < d.num_entities(); ++e) {
            std::uint32_t c = 0;
            auto [begin, end] = d.entity_pairs.row(e);
            for (auto it = begin; it != end; ++it) c += pair_true[*it] > 0;
            out[{Rule::c2, e}] = c;
        }
    }
    if (spec.c3) {
        for (std::uint32_t g = 0; g < d.num_g3(); ++g) {
            std::uint32_t c = 0;
            auto [begin, end] = d.g3_facts.row(g);
            for (auto it = begin; it != end; ++it) c += labels[*it];
            out[{Rule::c3, g}] = c;
        }
    }
    if (spec.c4) {
        for (std::uint32_t g = 0; g < d.num_g4(); ++g) {
            std::uint32_t c = 0;
            auto [begin, end] = d.g4_facts.row(g);
            for (auto it = begin; it != end; ++it) c += labels[*it];
            out[{Rule::c4, g}] = c;
        }
    }
    return out;
}

/// Soft-constraint surrogate: sum of max(0, count - 1) over all groups.
/// Zero iff every group holds at most one truth under its rule.
inline std::uint64_t violation_penalty(const ConstraintCountMap& counts) {
    std::uint64_t p = 0;
    for (const auto& [_, c] : counts) {
        if (c > 1) p += c - 1;
    }
    return p;
}

/// Incrementally maintained constraint counts for all four rules plus the
/// running penalty per rule. Kept in lockstep with a Labeling; flipping
/// one fact touches only that fact's groups.
struct ConstraintCounts {
    std::vector<std::uint32_t> c4;         // per (entity, time) group
    std::vector<std::uint32_t> c3;         // per (value, time) group
    std::vector<std::uint32_t> pair_true;  // per (entity, value) pair
    std::vector<std::uint32_t> c1;         // per value: pairs with a truth
    std::vector<std::uint32_t> c2;         // per entity: pairs with a truth
    std::uint64_t penalty[kNumRules] = {0, 0, 0, 0};
};

inline ConstraintCounts make_counts(const Dataset& d, const Labeling& labels) {
    ConstraintCounts cc;
    cc.c4.assign(d.num_g4(), 0);
    cc.c3.assign(d.num_g3(), 0);
    cc.pair_true.assign(d.num_pairs(), 0);
    cc.c1.assign(d.num_values(), 0);
    cc.c2.assign(d.num_entities(), 0);
    for (std::uint32_t f = 0; f < d.num_facts(); ++f) {
        if (!labels[f]) continue;
        cc.c4[d.fact_g4[f]]++;
        cc.c3[d.fact_g3[f]]++;
        cc.pair_true[d.fact_pair[f]]++;
    }
    for (std::uint32_t p = 0; p < d.num_pairs(); ++p) {
        if (cc.pair_true[p] > 0) {
            cc.c1[d.pair_value[p]]++;
            cc.c2[d.pair_entity[p]]++;
        }
    }
    auto pen = [](const std::vector<std::uint32_t>& v) {
        std::uint64_t p = 0;
        for (std::uint32_t c : v) {
            if (c > 1) p += c - 1;
        }
        return p;
    };
    cc.penalty[static_cast<int>(Rule::c1)] = pen(cc.c1);
    cc.penalty[static_cast<int>(Rule::c2)] = pen(cc.c2);
    cc.penalty[static_cast<int>(Rule::c3)] = pen(cc.c3);
    cc.penalty[static_cast<int>(Rule::c4)] = pen(cc.c4);
    return cc;
}

/// Applies the label change fact -> new_label to the cached counts.
/// The caller flips the Labeling itself.
inline void apply_flip(ConstraintCounts& cc, const Dataset& d, std::uint32_t fact, bool new_label) {
    const int delta = new_label ? 1 : -1;
    auto bump = [&](std::vector<std::uint32_t>& counts, std::uint32_t g, Rule r) {
        std::uint32_t& c = counts[g];
        std::uint64_t& pen = cc.penalty[static_cast<int>(r)];
        if (delta > 0) {
            if (c >= 1) pen += 1;
            c += 1;
        } else {
            c -= 1;
            if (c >= 1) pen -= 1;
        }
    };
    bump(cc.c4, d.fact_g4[fact], Rule::c4);
    bump(cc.c3, d.fact_g3[fact], Rule::c3);

    const std::uint32_t pair = d.fact_pair[fact];
    const bool indicator_changed =
        delta > 0 ? cc.pair_true[pair]++ == 0 : --cc.pair_true[pair] == 0;
    if (indicator_changed) {
        bump(cc.c1, d.pair_value[pair], Rule::c1);
        bump(cc.c2, d.pair_entity[pair], Rule::c2);
    }
}

/// Total penalty over the active rules, from the cached per-rule totals.
inline std::uint64_t active_penalty(const ConstraintCounts& cc, const ConstraintSpec& spec) {
    std::uint64_t p = 0;
    for (int r = 0; r < kNumRules; ++r) {
        if (spec.active(static_cast<Rule>(r))) p += cc.penalty[r];
    }
    return p;
}

}  // namespace ttd
