#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "ttd/constraints.hpp"
#include "ttd/dataset.hpp"

using namespace ttd;
using ttest::intro_records;
using ttest::intro_truth;

TEST_CASE("build_dataset on the four labeled intro tuples") {
    auto d = build_dataset(intro_records());
    REQUIRE(d.num_facts() == 4);
    REQUIRE(d.num_sources() == 4);
    REQUIRE(d.extractions.size() == 4);

    REQUIRE(d.find_fact("France", "Jacques Chirac", 1995).has_value());
    REQUIRE(d.find_fact("France", "Emmanuel Macron", 2019).has_value());
    REQUIRE(d.find_source("P1", SignalType::tag).has_value());
    REQUIRE(d.find_source("P1", SignalType::post).has_value());
    REQUIRE(d.find_source("P2", SignalType::tag).has_value());
    REQUIRE(d.find_source("P2", SignalType::post).has_value());
    // one entity, two values, three (entity, time) groups
    REQUIRE(d.num_entities() == 1);
    REQUIRE(d.num_values() == 2);
    REQUIRE(d.num_g4() == 3);
}

TEST_CASE("build_dataset empty input") {
    auto d = build_dataset({});
    REQUIRE(d.num_facts() == 0);
    REQUIRE(d.num_sources() == 0);
    REQUIRE(d.extractions.empty());
}

TEST_CASE("duplicate (fact, source) records merge by summing counts") {
    std::vector<ExtractionRecord> recs = {
        {"F", "A", 2000, "P", "tag", 2, 1},
        {"F", "A", 2000, "P", "tag", 3, 2},
    };
    BuildReport rep;
    auto d = build_dataset(recs, {}, &rep);
    REQUIRE(d.extractions.size() == 1);
    REQUIRE(d.extractions[0].count == 5);
    REQUIRE(rep.merged == 1);
    REQUIRE(rep.accepted == 2);
}

TEST_CASE("build_dataset rejects bad records with reasons") {
    std::vector<ExtractionRecord> recs = {
        {"F", "A", 2000, "P", "tag", 1, 1},
        {"F", "B", 2000, "P", "tag", 0, 2},       // count < 1
        {"F", "C", 999, "P", "tag", 1, 3},        // time below range
        {"F", "D", 3001, "P", "tag", 1, 4},       // time above range
        {"F", "E", 2000, "P", "sideways", 1, 5},  // unknown signal
        {"", "F", 2000, "P", "tag", 1, 6},        // empty entity
    };
    BuildReport rep;
    auto d = build_dataset(recs, {}, &rep);
    REQUIRE(d.num_facts() == 1);
    REQUIRE(rep.accepted == 1);
    REQUIRE(rep.rejected.size() == 5);
    CHECK(rep.rejected[0].reason == "count < 1");
    CHECK(rep.rejected[0].line == 2);
    CHECK(rep.rejected[1].reason.find("outside accepted range") != std::string::npos);
    CHECK(rep.rejected[3].reason.find("unknown signal") != std::string::npos);
    // configurable range
    auto d2 = build_dataset(recs, {990, 3100}, nullptr);
    REQUIRE(d2.num_facts() == 3);
}

TEST_CASE("constraint_count_c4 on the intro instance") {
    auto d = build_dataset(intro_records());
    const Labeling truth = intro_truth();
    CHECK(constraint_count_c4(d, truth, "France", 2019) == 1);
    CHECK(constraint_count_c4(d, truth, "France", 1995) == 1);
    CHECK(constraint_count_c4(d, truth, "France", 2004) == 0);
    CHECK(constraint_count_c4(d, truth, "Germany", 2019) == 0);  // unknown key

    const Labeling none(d.num_facts(), 0);
    CHECK(constraint_count_c4(d, none, "France", 2019) == 0);
}

TEST_CASE("constraint_count_c1 uses the distinct-entity indicator") {
    std::vector<ExtractionRecord> recs = {
        {"France", "Chirac", 1995, "P", "tag", 1, 1},
        {"France", "Chirac", 1996, "P", "tag", 1, 2},
        {"Italy", "Chirac", 1995, "P", "tag", 1, 3},
    };
    auto d = build_dataset(recs);
    // two true facts under the same entity still count one entity
    Labeling l = {1, 1, 0};
    CHECK(constraint_count_c1(d, l, "Chirac") == 1);
    l = {1, 1, 1};
    CHECK(constraint_count_c1(d, l, "Chirac") == 2);
    l = {0, 0, 0};
    CHECK(constraint_count_c1(d, l, "Chirac") == 0);
    CHECK(constraint_count_c1(d, l, "Macron") == 0);  // unknown value
}

TEST_CASE("single-group counts equal brute force on random instances") {
    Rng rng(1234);
    for (int round = 0; round < 20; ++round) {
        auto recs = ttest::random_records(rng, 20, 4, 5, 3, 3);
        auto d = build_dataset(recs);
        auto labels = ttest::random_labels(rng, d.num_facts());
        for (const Fact& f : d.facts) {
            CHECK(constraint_count_c4(d, labels, f.entity, f.time) ==
                  ttest::brute_c4(d, labels, f.entity, f.time));
            CHECK(constraint_count_c1(d, labels, f.value) == ttest::brute_c1(d, labels, f.value));
        }
    }
}

TEST_CASE("constraint_counts_all on the intro instance with {C1, C4}") {
    auto d = build_dataset(intro_records());
    const ConstraintSpec spec{true, false, false, true};
    auto counts = ttest::rekey_counts(d, constraint_counts_all(d, intro_truth(), spec));

    CHECK(counts.at({3, "France@1995"}) == 1);
    CHECK(counts.at({3, "France@2019"}) == 1);
    CHECK(counts.at({3, "France@2004"}) == 0);
    CHECK(counts.at({0, "Jacques Chirac"}) == 1);
    CHECK(counts.at({0, "Emmanuel Macron"}) == 1);
    CHECK(counts.size() == 5);
}

TEST_CASE("constraint_counts_all with empty spec is empty") {
    auto d = build_dataset(intro_records());
    CHECK(constraint_counts_all(d, intro_truth(), {}).empty());
}

TEST_CASE("constraint_counts_all C3 on a two-club one-player instance") {
    std::vector<ExtractionRecord> recs = {
        {"ClubA", "Player1", 2000, "P", "tag", 1, 1},
        {"ClubB", "Player1", 2000, "P", "tag", 1, 2},
        {"ClubA", "Player1", 2001, "P", "tag", 1, 3},
    };
    auto d = build_dataset(recs);
    const ConstraintSpec spec{false, false, true, false};
    // both clubs claim the player in 2000: count 2 for (Player1, 2000)
    auto counts = ttest::rekey_counts(d, constraint_counts_all(d, {1, 1, 1}, spec));
    CHECK(counts.at({2, "Player1@2000"}) == 2);
    CHECK(counts.at({2, "Player1@2001"}) == 1);
    // a transfer (one club per year) is fine
    counts = ttest::rekey_counts(d, constraint_counts_all(d, {1, 0, 1}, spec));
    CHECK(counts.at({2, "Player1@2000"}) == 1);
    CHECK(counts.at({2, "Player1@2001"}) == 1);
}

TEST_CASE("violation_penalty") {
    ConstraintCountMap m;
    m[{Rule::c4, 0}] = 1;
    m[{Rule::c4, 1}] = 0;
    m[{Rule::c4, 2}] = 1;
    CHECK(violation_penalty(m) == 0);

    m.clear();
    m[{Rule::c1, 0}] = 3;
    CHECK(violation_penalty(m) == 2);
}

TEST_CASE("penalty of labeling all four intro tuples true under {C4} is 1") {
    auto d = build_dataset(intro_records());
    const ConstraintSpec spec{false, false, false, true};
    const Labeling all_true(d.num_facts(), 1);
    auto counts = constraint_counts_all(d, all_true, spec);
    // (France, 2019) holds both Chirac and Macron; the other groups are fine
    CHECK(violation_penalty(counts) == 1);
}

TEST_CASE("counts_all equals the brute-force oracle on random instances") {
    Rng rng(987);
    const ConstraintSpec all{true, true, true, true};
    for (int round = 0; round < 30; ++round) {
        auto recs = ttest::random_records(rng, 25, 4, 6, 3, 3);
        auto d = build_dataset(recs);
        auto labels = ttest::random_labels(rng, d.num_facts());
        ConstraintSpec spec{rng.bernoulli(0.5), rng.bernoulli(0.5), rng.bernoulli(0.5), rng.bernoulli(0.5)};
        if (round == 0) spec = all;
        auto lib = ttest::rekey_counts(d, constraint_counts_all(d, labels, spec));
        auto brute = ttest::brute_counts_all(d, labels, spec);
        CHECK(lib == brute);
        CHECK(violation_penalty(constraint_counts_all(d, labels, spec)) == ttest::brute_penalty(brute));
    }
}

TEST_CASE("count bounds: group cardinality and distinct-partner caps") {
    Rng rng(555);
    auto recs = ttest::random_records(rng, 40, 3, 5, 3, 2);
    auto d = build_dataset(recs);
    for (int round = 0; round < 10; ++round) {
        auto labels = ttest::random_labels(rng, d.num_facts());
        for (std::uint32_t g = 0; g < d.num_g4(); ++g) {
            const auto& e = d.entity_names[d.g4_entity[g]];
            CHECK(constraint_count_c4(d, labels, e, d.g4_time[g]) <= d.g4_facts.row_size(g));
        }
        for (std::uint32_t v = 0; v < d.num_values(); ++v) {
            CHECK(constraint_count_c1(d, labels, d.value_names[v]) <= d.value_pairs.row_size(v));
        }
    }
}

TEST_CASE("with all labels true, counts equal group cardinalities") {
    Rng rng(777);
    auto recs = ttest::random_records(rng, 30, 3, 4, 3, 2);
    auto d = build_dataset(recs);
    const Labeling all_true(d.num_facts(), 1);
    auto counts = constraint_counts_all(d, all_true, {true, true, true, true});
    for (const auto& [ref, c] : counts) {
        switch (ref.rule) {
            case Rule::c1: CHECK(c == d.value_pairs.row_size(ref.id)); break;
            case Rule::c2: CHECK(c == d.entity_pairs.row_size(ref.id)); break;
            case Rule::c3: CHECK(c == d.g3_facts.row_size(ref.id)); break;
            case Rule::c4: CHECK(c == d.g4_facts.row_size(ref.id)); break;
        }
    }
}

TEST_CASE("flipping one fact only changes that fact's groups") {
    Rng rng(2024);
    auto recs = ttest::random_records(rng, 30, 4, 5, 3, 2);
    auto d = build_dataset(recs);
    const ConstraintSpec spec{true, true, true, true};
    auto labels = ttest::random_labels(rng, d.num_facts());
    auto before = constraint_counts_all(d, labels, spec);
    for (int round = 0; round < 10; ++round) {
        const auto f = static_cast<std::uint32_t>(rng.uniform_int(d.num_facts()));
        labels[f] ^= 1;
        auto after = constraint_counts_all(d, labels, spec);
        for (const auto& [ref, c] : after) {
            const bool touched = (ref.rule == Rule::c1 && ref.id == d.fact_value[f]) ||
                                 (ref.rule == Rule::c2 && ref.id == d.fact_entity[f]) ||
                                 (ref.rule == Rule::c3 && ref.id == d.fact_g3[f]) ||
                                 (ref.rule == Rule::c4 && ref.id == d.fact_g4[f]);
            if (!touched) CHECK(c == before.at(ref));
        }
        before = std::move(after);
    }
}

TEST_CASE("incremental cache matches a fresh recount through random flips") {
    Rng rng(31337);
    auto recs = ttest::random_records(rng, 40, 4, 6, 3, 3);
    auto d = build_dataset(recs);
    auto labels = ttest::random_labels(rng, d.num_facts());
    auto cc = make_counts(d, labels);
    for (int round = 0; round < 200; ++round) {
        const auto f = static_cast<std::uint32_t>(rng.uniform_int(d.num_facts()));
        const bool next = !labels[f];
        apply_flip(cc, d, f, next);
        labels[f] = next ? 1 : 0;
    }
    const auto fresh = make_counts(d, labels);
    CHECK(cc.c1 == fresh.c1);
    CHECK(cc.c2 == fresh.c2);
    CHECK(cc.c3 == fresh.c3);
    CHECK(cc.c4 == fresh.c4);
    CHECK(cc.pair_true == fresh.pair_true);
    for (int r = 0; r < kNumRules; ++r) CHECK(cc.penalty[r] == fresh.penalty[r]);
}

TEST_CASE("build_dataset is idempotent over its own serialized records") {
    Rng rng(4242);
    auto recs = ttest::random_records(rng, 50, 4, 6, 3, 4);
    auto d = build_dataset(recs);
    auto d2 = build_dataset(to_records(d));
    CHECK(d == d2);
}

TEST_CASE("from_parts validates indices and counts") {
    CHECK_THROWS_AS(Dataset::from_parts({{"E", "V", 2000}}, {}, {{0, 0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Dataset::from_parts({{"E", "V", 2000}}, {{"P", SignalType::tag}}, {{0, 0, 0}}),
                    std::invalid_argument);
    auto d = Dataset::from_parts({{"E", "V", 2000}}, {{"P", SignalType::tag}}, {{0, 0, 2}});
    CHECK(d.num_facts() == 1);
    CHECK(d.fact_edges.row_size(0) == 1);
}
