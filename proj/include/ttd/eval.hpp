#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "ttd/dataset.hpp"
#include "ttd/types.hpp"

namespace ttd {

/// True (entity, value, year) points, stored per-year. Period records are
/// expanded on load.
class GroundTruth {
public:
    void add_point(std::string_view entity, std::string_view value, int year) {
        keys_.insert(detail::fact_key(entity, value, year));
    }

    /// Expands [t_min, t_max] into per-year points. t_min <= t_max required.
    void add_period(std::string_view entity, std::string_view value, int t_min, int t_max) {
        if (t_min > t_max) throw std::invalid_argument("truth period with t_min > t_max");
        for (int t = t_min; t <= t_max; ++t) add_point(entity, value, t);
    }

    bool contains(std::string_view entity, std::string_view value, int year) const {
        return keys_.count(detail::fact_key(entity, value, year)) > 0;
    }

    std::size_t size() const { return keys_.size(); }

    std::size_t count_in(const std::unordered_set<std::string>& universe) const {
        std::size_t n = 0;
        for (const auto& k : keys_) n += universe.count(k);
        return n;
    }

private:
    std::unordered_set<std::string> keys_;
};

struct ScoredPrediction {
    std::string entity;
    std::string value;
    int time = 0;
    double score = 0.0;
    bool label = false;
};

enum class EvalSetting : std::uint8_t { point, period };

inline std::string_view to_string(EvalSetting s) {
    return s == EvalSetting::point ? "point" : "period";
}

struct EvalReport {
    EvalSetting setting = EvalSetting::point;
    double precision = 0, recall = 0, f1 = 0, pr_auc = 0;
    double recall_unrestricted = 0;  // denominator is the full ground truth
    std::uint64_t tp = 0, fp = 0, fn = 0;
    std::uint64_t truth_size = 0, truth_in_universe = 0;
    bool precision_undefined = false;  // no predicted-true points
    bool recall_undefined = false;     // no truth points inside the candidate universe
};

struct Period {
    std::string entity;
    std::string value;
    int t_min = 0, t_max = 0;

    friend bool operator==(const Period&, const Period&) = default;
    friend auto operator<=>(const Period&, const Period&) = default;
};

/// Merges each (entity, value)'s years into maximal runs of consecutive
/// years; isolated years become length-1 periods.
inline std::vector<Period> composite_periods(const std::vector<std::tuple<std::string, std::string, int>>& points) {
    std::map<std::pair<std::string, std::string>, std::vector<int>> years;
    for (const auto& [e, v, t] : points) years[{e, v}].push_back(t);
    std::vector<Period> out;
    for (auto& [ev, ts] : years) {
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        std::size_t i = 0;
        while (i < ts.size()) {
            std::size_t j = i;
            while (j + 1 < ts.size() && ts[j + 1] == ts[j] + 1) ++j;
            out.push_back({ev.first, ev.second, ts[i], ts[j]});
            i = j + 1;
        }
    }
    return out;
}

namespace eval_detail {

struct Unit {
    std::string key;  // (entity, value, time)
    double score = 0.0;
    bool predicted_true = false;
    bool positive = false;  // membership in ground truth
};

/// Area under the precision-recall curve: thresholds swept over distinct
/// scores in descending order, trapezoids between consecutive points,
/// anchored at (recall 0, precision 1).
inline double pr_auc(std::vector<std::pair<double, bool>> ranked, std::uint64_t positives) {
    if (positives == 0 || ranked.empty()) return 0.0;
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double auc = 0.0;
    double prev_recall = 0.0, prev_precision = 1.0;
    std::uint64_t tp = 0, seen = 0;
    std::size_t i = 0;
    while (i < ranked.size()) {
        const double threshold = ranked[i].first;
        while (i < ranked.size() && ranked[i].first == threshold) {
            seen++;
            tp += ranked[i].second;
            i++;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(positives);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        auc += (recall - prev_recall) * (precision + prev_precision) / 2.0;
        prev_recall = recall;
        prev_precision = precision;
    }
    return auc;
}

inline EvalReport eval_units(const std::vector<Unit>& units, const GroundTruth& truth,
                             const std::unordered_set<std::string>& universe, EvalSetting setting) {
    EvalReport rep;
    rep.setting = setting;
    rep.truth_size = truth.size();
    rep.truth_in_universe = truth.count_in(universe);

    std::uint64_t predicted = 0;
    for (const Unit& u : units) {
        if (!u.predicted_true) continue;
        predicted++;
        if (u.positive) {
            rep.tp++;
        } else {
            rep.fp++;
        }
    }
    rep.fn = rep.truth_in_universe - std::min<std::uint64_t>(rep.tp, rep.truth_in_universe);

    if (predicted == 0) {
        rep.precision_undefined = true;
    } else {
        rep.precision = static_cast<double>(rep.tp) / static_cast<double>(predicted);
    }
    if (rep.truth_in_universe == 0) {
        rep.recall_undefined = true;
    } else {
        rep.recall = static_cast<double>(rep.tp) / static_cast<double>(rep.truth_in_universe);
    }
    rep.recall_unrestricted =
        rep.truth_size == 0 ? 0.0 : static_cast<double>(rep.tp) / static_cast<double>(rep.truth_size);
    rep.f1 = (rep.precision + rep.recall) > 0.0
                 ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall)
                 : 0.0;

    std::vector<std::pair<double, bool>> ranked;
    ranked.reserve(units.size());
    std::uint64_t positives = 0;
    for (const Unit& u : units) {
        ranked.emplace_back(u.score, u.positive);
        positives += u.positive;
    }
    rep.pr_auc = pr_auc(std::move(ranked), positives);
    return rep;
}

}  // namespace eval_detail

/// Point-setting evaluation: a predicted-true (e, v, t) is a true positive
/// iff that exact point is in the ground truth. Recall's denominator is
/// restricted to truth points present among the scored facts (the
/// candidate universe); recall_unrestricted reports the full-truth view.
inline EvalReport point_eval(const std::vector<ScoredPrediction>& predictions, const GroundTruth& truth) {
    std::vector<eval_detail::Unit> units;
    units.reserve(predictions.size());
    std::unordered_set<std::string> universe;
    universe.reserve(predictions.size());
    for (const ScoredPrediction& p : predictions) {
        eval_detail::Unit u;
        u.key = detail::fact_key(p.entity, p.value, p.time);
        u.score = p.score;
        u.predicted_true = p.label;
        u.positive = truth.contains(p.entity, p.value, p.time);
        universe.insert(u.key);
        units.push_back(std::move(u));
    }
    return eval_detail::eval_units(units, truth, universe, EvalSetting::point);
}

/// Period-setting evaluation: predicted-true points are composited into
/// maximal consecutive-year periods per (entity, value); every year of a
/// period is scored against the per-year truth, carrying the period's
/// score (the max over its member points). Predicted-false facts keep
/// their own scores. Compositing never bridges gaps, so the expanded
/// point set equals the predicted-true set; only the ranking granularity
/// changes relative to point_eval.
inline EvalReport period_eval(const std::vector<ScoredPrediction>& predictions, const GroundTruth& truth) {
    std::unordered_set<std::string> universe;
    universe.reserve(predictions.size());
    for (const ScoredPrediction& p : predictions) {
        universe.insert(detail::fact_key(p.entity, p.value, p.time));
    }

    // composite predicted-true points; track each period's max score
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<int, double>>> true_points;
    std::vector<eval_detail::Unit> units;
    for (const ScoredPrediction& p : predictions) {
        if (p.label) {
            true_points[{p.entity, p.value}].emplace_back(p.time, p.score);
        } else {
            units.push_back({detail::fact_key(p.entity, p.value, p.time), p.score, false,
                             truth.contains(p.entity, p.value, p.time)});
        }
    }
    for (auto& [ev, ts] : true_points) {
        std::sort(ts.begin(), ts.end());
        std::size_t i = 0;
        while (i < ts.size()) {
            std::size_t j = i;
            double best = ts[i].second;
            while (j + 1 < ts.size() && ts[j + 1].first == ts[j].first + 1) {
                ++j;
                best = std::max(best, ts[j].second);
            }
            for (std::size_t k = i; k <= j; ++k) {
                const int year = ts[k].first;
                units.push_back({detail::fact_key(ev.first, ev.second, year), best, true,
                                 truth.contains(ev.first, ev.second, year)});
            }
            i = j + 1;
        }
    }
    return eval_detail::eval_units(units, truth, universe, EvalSetting::period);
}

/// Rows for the evaluators, one per fact, from any per-fact scores and
/// labels (posterior trust, baseline votes, ...).
inline std::vector<ScoredPrediction> make_predictions(const Dataset& d, std::span<const double> scores,
                                                      const Labeling& labels) {
    std::vector<ScoredPrediction> out;
    out.reserve(d.num_facts());
    for (std::size_t f = 0; f < d.num_facts(); ++f) {
        out.push_back({d.facts[f].entity, d.facts[f].value, d.facts[f].time, scores[f],
                       labels[f] != 0});
    }
    return out;
}

inline GroundTruth truth_from_labels(const Dataset& d, const Labeling& labels) {
    GroundTruth t;
    for (std::size_t f = 0; f < d.num_facts(); ++f) {
        if (labels[f]) t.add_point(d.facts[f].entity, d.facts[f].value, d.facts[f].time);
    }
    return t;
}

}  // namespace ttd
