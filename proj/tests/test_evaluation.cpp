#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace divprio;

namespace {

FaultMatrix matrix_of(const std::vector<std::string>& ids, const std::vector<std::vector<std::size_t>>& detects) {
    FaultMatrix fm;
    fm.test_ids = ids;
    fm.detects = detects;
    for (std::size_t f = 0; f < detects.size(); ++f) fm.faults.push_back("F" + std::to_string(f + 1));
    return fm;
}

std::vector<std::string> ids_of(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("T" + std::to_string(i));
    return ids;
}

std::vector<SuiteVersion> synthetic_versions(std::size_t count, std::size_t tests, std::size_t clusters) {
    std::vector<SuiteVersion> out;
    for (std::size_t v = 0; v < count; ++v) {
        auto c = synthetic::generate({.tests = tests, .clusters = clusters, .target_bytes = 800, .seed = 100 + v});
        out.push_back({"synthetic", "v" + std::to_string(v), std::move(c.suite), std::move(c.faults)});
    }
    return out;
}

}  // namespace

TEST(Apfd, FormulaExamples) {
    auto fm = matrix_of(ids_of(2), {{0}});
    EXPECT_DOUBLE_EQ(apfd(std::vector<std::string>{"T0", "T1"}, fm).apfd, 75.0);

    auto fm4 = matrix_of(ids_of(4), {{3}});
    auto r = apfd(std::vector<std::string>{"T0", "T1", "T2", "T3"}, fm4, "o");
    EXPECT_DOUBLE_EQ(r.apfd, 12.5);
    EXPECT_EQ(r.tf, std::vector<std::size_t>{4});
    EXPECT_EQ(r.n, 4u);
    EXPECT_EQ(r.m, 1u);
    EXPECT_EQ(r.order_id, "o");
}

TEST(Apfd, MatchesWalkOracle) {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = trial < 100 ? 5 : 1 + rng() % 30;
        const std::size_t m = trial < 100 ? 3 : 1 + rng() % 8;
        auto ids = ids_of(n);
        std::vector<std::vector<std::size_t>> detects(m);
        std::vector<std::set<std::string>> detecting(m);
        for (std::size_t f = 0; f < m; ++f) {
            for (std::size_t t = 0; t < n; ++t) {
                if (rng() % 3 == 0) detects[f].push_back(t);
            }
            if (detects[f].empty()) detects[f].push_back(rng() % n);
            for (auto t : detects[f]) detecting[f].insert(ids[t]);
        }
        auto order = ids;
        std::shuffle(order.begin(), order.end(), rng);
        auto r = apfd(order, matrix_of(ids, detects));
        EXPECT_NEAR(r.apfd, oracle::apfd_walk(order, detecting), 1e-9);
        for (auto tf : r.tf) {
            EXPECT_GE(tf, 1u);
            EXPECT_LE(tf, n);
        }
        EXPECT_GT(r.apfd, 0.0);
        EXPECT_LT(r.apfd, 100.0);
    }
}

TEST(Apfd, StrictlyDecreasingInDetectorPosition) {
    const std::size_t n = 9;
    auto ids = ids_of(n);
    auto fm = matrix_of(ids, {{4}});
    double prev = 101.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        std::vector<std::string> order;
        for (std::size_t i = 0, other = 0; i < n; ++i) {
            if (i == pos) {
                order.push_back("T4");
            } else {
                if (other == 4) ++other;
                order.push_back(ids[other++]);
            }
        }
        const double a = apfd(order, fm).apfd;
        EXPECT_LT(a, prev);
        prev = a;
    }
}

TEST(Apfd, RejectsIdMismatch) {
    auto fm = matrix_of(ids_of(3), {{0}});
    auto message = [&](std::vector<std::string> order) {
        try {
            apfd(order, fm);
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message({"T0", "T1"}).find("T2"), std::string::npos);
    EXPECT_NE(message({"T0", "T1", "T2", "T9"}).find("T9"), std::string::npos);
    EXPECT_NE(message({"T0", "T1", "T1"}).find("T1"), std::string::npos);
}

TEST(Experiment, RandomOnlyGivesOneApfdPerSeedAndNoComparisons) {
    auto versions = synthetic_versions(1, 30, 3);
    const Technique techniques[] = {Technique::rnd};
    std::vector<std::uint64_t> seeds(10);
    std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
    ExperimentOptions opts;
    opts.replicates = 200;
    auto res = run_experiment(versions, techniques, seeds, opts);
    EXPECT_EQ(res.rounds.size(), 10u);
    EXPECT_TRUE(res.comparisons.empty());
    ASSERT_EQ(res.summaries.size(), 1u);
    EXPECT_EQ(res.summaries[0].rounds, 10u);
    // distinct seeds give distinct shuffles
    std::set<std::uint64_t> round_seeds;
    for (const auto& r : res.rounds) round_seeds.insert(r.seed);
    EXPECT_EQ(round_seeds.size(), 10u);
}

TEST(Experiment, SelfComparisonIsNeutral) {
    auto versions = synthetic_versions(6, 40, 4);
    const Technique techniques[] = {Technique::ncd};
    const std::uint64_t seeds[] = {1};
    ExperimentOptions opts;
    opts.replicates = 200;
    auto res = run_experiment(versions, techniques, seeds, opts);
    std::vector<double> apfds;
    for (const auto& r : res.rounds) apfds.push_back(r.apfd);
    auto c = compare_samples("all", "NCD", apfds, "NCD", apfds, opts);
    EXPECT_EQ(c.vda, 0.5);
    EXPECT_GT(c.p_value, 0.9);
    EXPECT_FALSE(c.significant);
}

TEST(Experiment, ClusteredCorpusFavoursNcdOverRandom) {
    auto versions = synthetic_versions(10, 100, 10);
    const Technique techniques[] = {Technique::rnd, Technique::ncd};
    const std::uint64_t seeds[] = {7};
    ExperimentOptions opts;
    opts.replicates = 300;
    auto res = run_experiment(versions, techniques, seeds, opts);
    EXPECT_EQ(res.rounds.size(), 20u);
    ASSERT_EQ(res.comparisons.size(), 1u);
    const auto& c = res.comparisons[0];
    EXPECT_EQ(c.x, "NCD");
    EXPECT_EQ(c.y, "RND");
    EXPECT_GT(c.vda, 0.7);
    EXPECT_EQ(c.significant, c.p_value < 0.05);
    EXPECT_LE(c.ci_x.lower, c.mean_x);
    EXPECT_GE(c.ci_x.upper, c.mean_x);
}

TEST(Experiment, PerSuiteGroupingAndReports) {
    auto a = synthetic_versions(2, 20, 2);
    auto b = synthetic_versions(2, 20, 2);
    for (auto& v : b) v.suite = "other";
    a.insert(a.end(), b.begin(), b.end());
    const Technique techniques[] = {Technique::mnh, Technique::rnd, Technique::lsh};
    const std::uint64_t seeds[] = {1, 2};
    ExperimentOptions opts;
    opts.replicates = 100;
    opts.grouping = CiGrouping::per_suite;
    auto res = run_experiment(a, techniques, seeds, opts);
    EXPECT_EQ(res.rounds.size(), 4u * 2u * 3u);
    EXPECT_EQ(res.summaries.size(), 6u);
    ASSERT_EQ(res.comparisons.size(), 6u);
    for (const auto& c : res.comparisons) {
        if (c.x == "RND" || c.y == "RND") {
            EXPECT_EQ(c.y, "RND");
        }
    }
    EXPECT_EQ(res.comparisons[0].group, "synthetic");
    EXPECT_EQ(res.comparisons[3].group, "other");

    auto vda = report::vda_csv(res);
    EXPECT_EQ(vda.rfind("group,technique,vda_vs_rnd,p_value,significant,magnitude\n", 0), 0u);
    EXPECT_EQ(std::count(vda.begin(), vda.end(), '\n'), 5);  // header + MNH, LSH per group
    auto rounds = report::rounds_csv(res, false);
    EXPECT_NE(rounds.find("NA,NA"), std::string::npos);
    auto j = report::to_json(res, false);
    EXPECT_FALSE(j["summaries"][0].contains("mean_amet"));
    EXPECT_TRUE(report::to_json(res)["summaries"][0].contains("mean_amet"));
}

TEST(Experiment, RejectsEmptyInputs) {
    const Technique techniques[] = {Technique::rnd};
    const std::uint64_t seeds[] = {1};
    ExperimentOptions opts;
    EXPECT_THROW(run_experiment({}, techniques, seeds, opts), ConfigError);
    auto versions = synthetic_versions(1, 5, 1);
    EXPECT_THROW(run_experiment(versions, {}, seeds, opts), ConfigError);
    EXPECT_THROW(run_experiment(versions, techniques, {}, opts), ConfigError);
}

TEST(Synthetic, ClustersAndFaultsLineUp) {
    auto c = synthetic::generate({.tests = 50, .clusters = 5, .target_bytes = 500, .seed = 3});
    EXPECT_EQ(c.suite.size(), 50u);
    EXPECT_EQ(c.faults.m(), 5u);
    for (std::size_t f = 0; f < 5; ++f) {
        for (auto t : c.faults.detects[f]) EXPECT_EQ(c.cluster_of[t], f);
    }
    auto again = synthetic::generate({.tests = 50, .clusters = 5, .target_bytes = 500, .seed = 3});
    EXPECT_EQ(content_hash(again.suite), content_hash(c.suite));
    EXPECT_THROW(synthetic::generate({.tests = 3, .clusters = 4}), ConfigError);
}
