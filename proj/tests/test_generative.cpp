#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "ttd/constraints.hpp"
#include "ttd/generative.hpp"

using namespace ttd;

namespace {

GenConfig small_cfg(std::uint64_t seed) {
    GenConfig cfg;
    cfg.num_entities = 10;
    cfg.num_values = 40;
    cfg.time_min = 2000;
    cfg.time_max = 2009;
    cfg.num_facts = 200;
    cfg.sources_per_signal = 5;
    cfg.mean_facts_per_source = 30.0;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("sample_generative is bit-reproducible given a seed") {
    auto cfg = small_cfg(99);
    cfg.plant = {true, false, false, true};
    auto a = sample_generative(cfg);
    auto b = sample_generative(cfg);
    CHECK(a.dataset == b.dataset);
    CHECK(a.truth.labels == b.truth.labels);
    CHECK(a.truth.theta == b.truth.theta);
    CHECK(a.truth.lambda0 == b.truth.lambda0);
    CHECK(a.truth.lambda1 == b.truth.lambda1);

    auto c = sample_generative(small_cfg(100));
    CHECK_FALSE(c.dataset == a.dataset);
}

TEST_CASE("uniform beta prior yields about half true labels") {
    GenConfig cfg = small_cfg(7);
    cfg.num_facts = 20000;
    cfg.num_entities = 100;
    cfg.num_values = 400;
    cfg.sources_per_signal = 2;
    cfg.mean_facts_per_source = 5.0;
    REQUIRE(cfg.prior.beta0 == 1.0);
    REQUIRE(cfg.prior.beta1 == 1.0);
    auto gen = sample_generative(cfg);
    double mean = 0;
    for (auto l : gen.truth.labels) mean += l;
    mean /= static_cast<double>(gen.truth.labels.size());
    CHECK_THAT(mean, Catch::Matchers::WithinAbs(0.5, 0.02));
}

TEST_CASE("class count means match an independent Monte-Carlo oracle") {
    // separated rates: true-side prior mean 5, false-side 0.5
    GenConfig cfg;
    cfg.num_entities = 50;
    cfg.num_values = 200;
    cfg.num_facts = 20000;
    cfg.sources_per_signal = 1000;
    cfg.mean_facts_per_source = 50.0;  // ~1e5 edges
    cfg.prior.set_rate_prior({1.0, 2.0, 5.0, 1.0});
    cfg.seed = 17;
    auto gen = sample_generative(cfg);

    double sum[2] = {0, 0};
    std::size_t n[2] = {0, 0};
    for (const Extraction& x : gen.dataset.extractions) {
        const int cls = gen.truth.labels[x.fact];
        sum[cls] += static_cast<double>(x.count);
        n[cls]++;
    }
    const double mean_false = sum[0] / static_cast<double>(n[0]);
    const double mean_true = sum[1] / static_cast<double>(n[1]);
    CHECK(mean_true > mean_false);

    // oracle: same two-level draw (rate per source, Poisson per edge, zero
    // counts dropped) written directly against the std:: distributions
    std::mt19937_64 g(555);
    auto oracle_mean = [&](double shape, double rate) {
        std::gamma_distribution<double> gd(shape, 1.0 / rate);
        double total = 0;
        std::size_t kept = 0;
        for (int s = 0; s < 2000; ++s) {
            const double lambda = gd(g);
            std::poisson_distribution<long> pd(lambda);
            for (int j = 0; j < 50; ++j) {
                const long o = pd(g);
                if (o >= 1) {
                    total += static_cast<double>(o);
                    kept++;
                }
            }
        }
        return total / static_cast<double>(kept);
    };
    const double oracle_false = oracle_mean(1.0, 2.0);
    const double oracle_true = oracle_mean(5.0, 1.0);
    CHECK_THAT(mean_false, Catch::Matchers::WithinRel(oracle_false, 0.10));
    CHECK_THAT(mean_true, Catch::Matchers::WithinRel(oracle_true, 0.10));
}

TEST_CASE("zero-truncation off drops zero-count edges and nothing else") {
    GenConfig cfg = small_cfg(23);
    cfg.prior.set_rate_prior({0.5, 2.0, 3.0, 1.0});  // false-side mean 0.25: many zeros
    auto gen = sample_generative(cfg);
    std::size_t false_kept = 0, false_drawn = 0;
    for (const Extraction& x : gen.dataset.extractions) {
        CHECK(x.count >= 1);
        if (!gen.truth.labels[x.fact]) false_kept++;
    }
    for (const RawEdge& e : gen.truth.raw_edges) {
        if (!gen.truth.labels[e.fact]) false_drawn++;
    }
    CHECK(false_kept < false_drawn);
    CHECK(gen.dataset.extractions.size() < gen.truth.raw_edges.size());
}

TEST_CASE("zero-truncation flag changes counts but never labels or topology") {
    GenConfig cfg = small_cfg(31);
    cfg.plant = {false, false, false, true};
    auto off = sample_generative(cfg);
    cfg.zero_truncated = true;
    auto on = sample_generative(cfg);

    CHECK(off.truth.labels == on.truth.labels);
    REQUIRE(off.truth.raw_edges.size() == on.truth.raw_edges.size());
    for (std::size_t i = 0; i < off.truth.raw_edges.size(); ++i) {
        CHECK(off.truth.raw_edges[i].fact == on.truth.raw_edges[i].fact);
        CHECK(off.truth.raw_edges[i].source == on.truth.raw_edges[i].source);
        CHECK(on.truth.raw_edges[i].count >= 1);
    }
    // truncated run keeps every edge
    CHECK(on.dataset.extractions.size() == on.truth.raw_edges.size());
}

TEST_CASE("per-source class means converge to the planted rates") {
    GenConfig cfg;
    cfg.num_entities = 100;
    cfg.num_values = 500;
    cfg.num_facts = 30000;
    cfg.sources_per_signal = 1;  // two sources, huge degree
    cfg.mean_facts_per_source = 30000.0;
    cfg.prior.set_rate_prior({16.0, 16.0, 50.0, 10.0});  // concentrated priors
    cfg.seed = 4;
    auto gen = sample_generative(cfg);

    double sum[2][2] = {{0, 0}, {0, 0}};
    std::size_t n[2][2] = {{0, 0}, {0, 0}};
    for (const RawEdge& e : gen.truth.raw_edges) {
        const int cls = gen.truth.labels[e.fact];
        sum[e.source][cls] += static_cast<double>(e.count);
        n[e.source][cls]++;
    }
    for (int s = 0; s < 2; ++s) {
        REQUIRE(n[s][0] >= 1000);
        REQUIRE(n[s][1] >= 1000);
        const double mean0 = sum[s][0] / static_cast<double>(n[s][0]);
        const double mean1 = sum[s][1] / static_cast<double>(n[s][1]);
        CHECK_THAT(mean0, Catch::Matchers::WithinRel(gen.truth.lambda0[s], 0.05));
        CHECK_THAT(mean1, Catch::Matchers::WithinRel(gen.truth.lambda1[s], 0.05));
    }
}

TEST_CASE("plant_constrained_truth requires a nonempty spec") {
    CHECK_THROWS_AS(plant_constrained_truth(small_cfg(1)), std::invalid_argument);
}

TEST_CASE("plant_constrained_truth: one entity, one time, three candidate values") {
    GenConfig cfg;
    cfg.num_entities = 1;
    cfg.num_values = 3;
    cfg.time_min = 2000;
    cfg.time_max = 2000;
    cfg.num_facts = 3;
    cfg.plant = {false, false, false, true};
    cfg.seed = 11;
    auto labels = plant_constrained_truth(cfg);
    REQUIRE(labels.size() == 3);
    int trues = 0;
    for (auto l : labels) trues += l;
    CHECK(trues == 1);
}

TEST_CASE("planted truth satisfies the requested constraints on 100 random configs") {
    Rng rng(60001);
    for (int round = 0; round < 100; ++round) {
        GenConfig cfg;
        cfg.num_entities = 2 + static_cast<std::uint32_t>(rng.uniform_int(10));
        cfg.num_values = cfg.num_entities * (2 + static_cast<std::uint32_t>(rng.uniform_int(6)));
        cfg.time_min = 2000;
        cfg.time_max = 2000 + static_cast<int>(rng.uniform_int(12));
        cfg.num_facts = 20 + static_cast<std::uint32_t>(rng.uniform_int(150));
        cfg.sources_per_signal = 2;
        cfg.mean_facts_per_source = 10.0;
        cfg.seed = rng.uniform_int(1u << 30);
        do {
            cfg.plant = {rng.bernoulli(0.5), rng.bernoulli(0.3), rng.bernoulli(0.3), rng.bernoulli(0.5)};
        } while (!cfg.plant.any());
        const double universe = static_cast<double>(cfg.num_entities) * cfg.num_values * cfg.num_years();
        if (cfg.num_facts > universe / 2) cfg.num_facts = static_cast<std::uint32_t>(universe / 2);

        auto gen = sample_generative(cfg);
        const auto counts = constraint_counts_all(gen.dataset, gen.truth.labels, cfg.plant);
        CHECK(violation_penalty(counts) == 0);

        // the standalone planting op agrees with what the generator used
        CHECK(plant_constrained_truth(cfg) == gen.truth.labels);
    }
}

TEST_CASE("generative config errors") {
    GenConfig cfg = small_cfg(3);
    cfg.num_facts = 0;
    CHECK_THROWS_AS(sample_generative(cfg), std::invalid_argument);

    cfg = small_cfg(3);
    cfg.time_max = cfg.time_min - 1;
    CHECK_THROWS_AS(sample_generative(cfg), std::invalid_argument);

    cfg = small_cfg(3);
    cfg.num_entities = 1;
    cfg.num_values = 2;
    cfg.time_min = cfg.time_max = 2000;
    cfg.num_facts = 3;  // larger than the 1x2x1 universe
    CHECK_THROWS_AS(sample_generative(cfg), std::invalid_argument);

    // rates so small every count draws zero
    cfg = small_cfg(3);
    cfg.num_facts = 10;
    cfg.sources_per_signal = 1;
    cfg.mean_facts_per_source = 5.0;
    cfg.prior.set_rate_prior({1e-6, 1e3, 1e-6, 1e3});
    CHECK_THROWS_AS(sample_generative(cfg), std::runtime_error);
}

TEST_CASE("every fact is covered by at least one drawn edge") {
    auto cfg = small_cfg(77);
    cfg.mean_facts_per_source = 2.0;  // sparse topology forces the coverage pass
    auto gen = sample_generative(cfg);
    std::vector<char> covered(gen.dataset.num_facts(), 0);
    for (const RawEdge& e : gen.truth.raw_edges) covered[e.fact] = 1;
    for (char c : covered) CHECK(c == 1);
}
