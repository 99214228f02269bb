#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace divprio;

namespace {

TestSuite numbered_suite(std::size_t n) {
    std::vector<TestCase> cases;
    for (std::size_t i = 0; i < n; ++i) cases.push_back({"T" + std::to_string(i), to_bytes(std::to_string(i))});
    return TestSuite(std::move(cases));
}

/// Random symmetric matrix with small integer distances so ties are common.
DistanceMatrix random_matrix(const TestSuite& suite, std::mt19937_64& rng, unsigned levels) {
    DistanceMatrix m("random", suite.ids());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        for (std::size_t j = i + 1; j < suite.size(); ++j) m.set(i, j, static_cast<double>(rng() % levels));
    }
    return m;
}

bool is_permutation_of_suite(const PrioritizedOrder& o, std::size_t n) {
    if (o.indices.size() != n || o.order.size() != n || o.scores.size() != n) return false;
    std::vector<std::size_t> sorted = o.indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (sorted[i] != i) return false;
    }
    return true;
}

std::vector<std::string> random_sources(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(testutil::random_text(rng, 20 + rng() % 200, 6));
    return out;
}

TestSuite suite_from(const std::vector<std::string>& sources) {
    std::vector<std::pair<std::string, std::string>> cases;
    for (std::size_t i = 0; i < sources.size(); ++i) cases.emplace_back("t" + std::to_string(i), sources[i]);
    return testutil::make_suite(cases);
}

}  // namespace

TEST(Pairwise, HandTrace) {
    auto suite = testutil::make_suite({{"A", "a"}, {"B", "b"}, {"C", "c"}});
    DistanceMatrix m("hand", suite.ids());
    m.set(0, 1, 1.0);
    m.set(0, 2, 4.0);
    m.set(1, 2, 3.0);
    auto o = prioritize_pairwise(suite, m);
    EXPECT_EQ(o.order, (std::vector<std::string>{"C", "A", "B"}));
    EXPECT_EQ(o.scores, (std::vector<double>{3.0, 4.0, 1.0}));

    auto sc = prioritize_pairwise(suite, m, PairwiseMode::minimize);
    // seed values 1, 1, 3: A wins the tie; then B (1) before C (4)
    EXPECT_EQ(sc.order, (std::vector<std::string>{"A", "B", "C"}));
}

TEST(Pairwise, SingleTest) {
    auto suite = testutil::make_suite({{"only", "x"}});
    auto o = prioritize_pairwise(suite, DistanceMatrix("m", suite.ids()));
    EXPECT_EQ(o.order, std::vector<std::string>{"only"});
    EXPECT_EQ(o.scores, std::vector<double>{0.0});
}

TEST(Pairwise, RejectsMismatchedMatrix) {
    auto suite = numbered_suite(3);
    EXPECT_THROW(prioritize_pairwise(suite, DistanceMatrix("m", {"T0", "T1"})), ConfigError);
    EXPECT_THROW(prioritize_pairwise(suite, DistanceMatrix("m", {"T0", "T2", "T1"})), ConfigError);
}

TEST(Pairwise, MatchesNaiveGreedyOnSmallSuites) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        auto suite = numbered_suite(1 + rng() % 8);
        auto m = random_matrix(suite, rng, trial % 2 ? 4 : 1000);
        EXPECT_EQ(prioritize_pairwise(suite, m).indices, oracle::pairwise_order(m, true));
        EXPECT_EQ(prioritize_pairwise(suite, m, PairwiseMode::minimize).indices, oracle::pairwise_order(m, false));
    }
}

TEST(Pairwise, ScoresAreDistanceToPrioritizedSet) {
    std::mt19937_64 rng(32);
    auto suite = numbered_suite(12);
    auto m = random_matrix(suite, rng, 50);
    auto o = prioritize_pairwise(suite, m);
    for (std::size_t step = 1; step < o.indices.size(); ++step) {
        std::vector<std::size_t> prefix(o.indices.begin(), o.indices.begin() + static_cast<std::ptrdiff_t>(step));
        EXPECT_EQ(o.scores[step], oracle::distance_to_set(o.indices[step], prefix, m));
    }
}

TEST(Pairwise, RealMetricsMatchBruteForce) {
    testutil::QuietWarnings quiet;
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        auto sources = random_sources(rng, 2 + rng() % 7);
        auto suite = suite_from(sources);
        for (auto t : {Technique::mnh, Technique::jac, Technique::ncd, Technique::sc}) {
            TechniqueOptions opts;
            auto got = prioritize(suite, t, opts);
            auto m = build_distance_matrix(suite, metric_for(t, opts));
            EXPECT_EQ(got.indices, oracle::pairwise_order(m, t != Technique::sc)) << acronym(t);
            EXPECT_EQ(got.technique, acronym(t));
        }
    }
}

TEST(NcdMs, SingleTest) {
    auto suite = testutil::make_suite({{"only", "some content"}});
    Lz4Compressor lz4;
    auto o = prioritize_ncd_ms(suite, lz4);
    EXPECT_EQ(o.order, std::vector<std::string>{"only"});
    EXPECT_EQ(o.scores[0], static_cast<double>(lz4.compressed_size(suite[0].bytes())));
}

TEST(NcdMs, PrefersUnrelatedOverDuplicate) {
    std::mt19937_64 rng(34);
    const auto base = testutil::random_text(rng, 2000, 26);
    const auto other = testutil::random_text(rng, 1500, 26);
    // base is largest, so it goes first; its duplicate adds almost nothing
    auto suite = testutil::make_suite({{"dup", base}, {"base", base + "x"}, {"other", other}});
    Lz4Compressor lz4;
    auto o = prioritize_ncd_ms(suite, lz4);
    EXPECT_EQ(o.order, (std::vector<std::string>{"base", "other", "dup"}));
    EXPECT_LT(o.scores[2], 0.1 * o.scores[1]);
}

TEST(NcdMs, MatchesFreshRecomputation) {
    testutil::QuietWarnings quiet;
    std::mt19937_64 rng(35);
    Lz4Compressor lz4;
    testutil::DistinctBytesCompressor distinct;
    for (int trial = 0; trial < 60; ++trial) {
        auto suite = suite_from(random_sources(rng, 1 + rng() % 8));
        EXPECT_EQ(prioritize_ncd_ms(suite, lz4).indices, oracle::ncd_ms_order(suite, lz4));
        EXPECT_EQ(prioritize_ncd_ms(suite, distinct).indices, oracle::ncd_ms_order(suite, distinct));
    }
}

TEST(Lsh, FirstPickIsManifestHead) {
    std::mt19937_64 rng(36);
    auto suite = suite_from(random_sources(rng, 15));
    auto o = prioritize_lsh(suite, LshConfig{});
    EXPECT_EQ(o.indices[0], 0u);
    EXPECT_EQ(o.scores[0], 1.0);
}

TEST(Lsh, IsolatedTestComesSecond) {
    std::mt19937_64 rng(37);
    const auto base = testutil::random_text(rng, 1500, 26);
    std::vector<std::string> sources;
    for (int i = 0; i < 20; ++i) {
        auto s = base;
        s[rng() % s.size()] = '#';
        sources.push_back(s);
    }
    sources[15] = testutil::random_text(rng, 1500, 26);
    auto o = prioritize_lsh(suite_from(sources), LshConfig{});
    EXPECT_EQ(o.indices[0], 0u);
    EXPECT_EQ(o.indices[1], 15u);
}

TEST(Lsh, OrdersArePermutations) {
    testutil::QuietWarnings quiet;
    std::mt19937_64 rng(38);
    const std::pair<std::size_t, int> plan[] = {{10, 70}, {100, 27}, {1000, 3}};
    for (auto [n, corpora] : plan) {
        for (int c = 0; c < corpora; ++c) {
            auto suite = suite_from(random_sources(rng, n));
            LshConfig cfg;
            cfg.seed = rng();
            EXPECT_TRUE(is_permutation_of_suite(prioritize_lsh(suite, cfg), n)) << "n=" << n;
        }
    }
}

TEST(Lsh, AllEmptySetsFallBackToCollidingTests) {
    testutil::QuietWarnings quiet;
    auto suite = testutil::make_suite({{"a", "ab"}, {"b", "cd"}, {"c", "ef"}});
    auto o = prioritize_lsh(suite, LshConfig{});
    EXPECT_EQ(o.indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Random, DeterministicPermutation) {
    auto suite = numbered_suite(50);
    auto a = prioritize_random(suite, 99);
    EXPECT_EQ(a.indices, prioritize_random(suite, 99).indices);
    EXPECT_NE(a.indices, prioritize_random(suite, 100).indices);
    EXPECT_TRUE(is_permutation_of_suite(a, 50));
    EXPECT_EQ(a.seed, 99u);
}

TEST(Random, UniformOverPermutations) {
    auto suite = numbered_suite(3);
    std::map<std::vector<std::size_t>, int> counts;
    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) ++counts[prioritize_random(suite, static_cast<std::uint64_t>(s)).indices];
    ASSERT_EQ(counts.size(), 6u);
    for (const auto& [perm, c] : counts) EXPECT_NEAR(static_cast<double>(c) / seeds, 1.0 / 6.0, 0.02);
}

TEST(Dispatch, JobsDoNotChangeOrders) {
    testutil::QuietWarnings quiet;
    auto corpus = synthetic::generate({.tests = 40, .clusters = 4, .target_bytes = 600, .seed = 5});
    for (auto t : all_techniques) {
        TechniqueOptions one, four;
        four.jobs = 4;
        EXPECT_EQ(prioritize(corpus.suite, t, one).indices, prioritize(corpus.suite, t, four).indices) << acronym(t);
    }
}

TEST(Dispatch, ParsesAcronyms) {
    EXPECT_EQ(parse_technique("ncd-ms"), Technique::ncd_ms);
    EXPECT_EQ(parse_technique("NCD_MS"), Technique::ncd_ms);
    EXPECT_EQ(parse_technique("Lsh"), Technique::lsh);
    EXPECT_FALSE(parse_technique("XYZ"));
    for (auto t : all_techniques) EXPECT_EQ(parse_technique(acronym(t)), t);
}

TEST(Dispatch, RejectsBadLshConfig) {
    auto suite = numbered_suite(3);
    TechniqueOptions opts;
    opts.lsh = {10, 3, 3, 1};
    EXPECT_THROW(prioritize(suite, Technique::lsh, opts), ConfigError);
}
