#pragma once

#include <cstdint>
#include <vector>

#include "ttd/dataset.hpp"
#include "ttd/types.hpp"

namespace ttd {

struct BaselineResult {
    std::vector<double> score;  // per fact
    Labeling label;             // per fact
};

/// Total observed frequency per fact, labeled by an absolute threshold.
inline BaselineResult frequency_scores(const Dataset& d, double min_score = 2.0) {
    BaselineResult r;
    r.score.assign(d.num_facts(), 0.0);
    for (const Extraction& x : d.extractions) r.score[x.fact] += static_cast<double>(x.count);
    r.label.resize(d.num_facts());
    for (std::size_t f = 0; f < d.num_facts(); ++f) r.label[f] = r.score[f] >= min_score ? 1 : 0;
    return r;
}

/// Weighted majority vote. With C4 active, the highest-scoring fact of
/// each (entity, time) group wins, ties going to the lexicographically
/// smaller value; other rules are not consulted. Without C4, facts are
/// labeled by the same absolute threshold frequency_scores uses.
inline BaselineResult majority_vote(const Dataset& d, const ConstraintSpec& spec, double min_score = 2.0) {
    BaselineResult r = frequency_scores(d, min_score);
    if (!spec.c4) return r;

    std::fill(r.label.begin(), r.label.end(), 0);
    for (std::uint32_t g = 0; g < d.num_g4(); ++g) {
        auto [begin, end] = d.g4_facts.row(g);
        if (begin == end) continue;
        std::uint32_t best = *begin;
        for (auto it = begin + 1; it != end; ++it) {
            const std::uint32_t f = *it;
            if (r.score[f] > r.score[best] ||
                (r.score[f] == r.score[best] && d.facts[f].value < d.facts[best].value)) {
                best = f;
            }
        }
        r.label[best] = 1;
    }
    return r;
}

}  // namespace ttd
