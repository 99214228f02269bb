#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace divprio;

namespace {

ShingleSet make_set(std::vector<std::uint64_t> codes) {
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    return {5, std::move(codes)};
}

/// Two sets over fresh random elements with exactly `common` shared out of
/// `total` distinct elements.
std::pair<ShingleSet, ShingleSet> constructed_pair(std::mt19937_64& rng, std::size_t total, std::size_t common) {
    std::vector<std::uint64_t> a, b;
    for (std::size_t i = 0; i < total; ++i) {
        const auto v = rng();
        if (i < common) {
            a.push_back(v);
            b.push_back(v);
        } else if ((i - common) % 2 == 0) {
            a.push_back(v);
        } else {
            b.push_back(v);
        }
    }
    return {make_set(a), make_set(b)};
}

ShingleSet random_set(std::mt19937_64& rng, std::size_t universe, std::size_t max_size) {
    std::vector<std::uint64_t> v(rng() % (max_size + 1));
    for (auto& x : v) x = rng() % universe;
    return make_set(v);
}

ShingleSet set_union(const ShingleSet& a, const ShingleSet& b) {
    std::vector<std::uint64_t> u;
    std::set_union(a.shingles.begin(), a.shingles.end(), b.shingles.begin(), b.shingles.end(), std::back_inserter(u));
    return {a.k, u};
}

}  // namespace

TEST(LshConfig, DefaultsAndThreshold) {
    LshConfig cfg;
    EXPECT_EQ(cfg.permutations, 10u);
    EXPECT_EQ(cfg.bands, 10u);
    EXPECT_EQ(cfg.rows, 1u);
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_DOUBLE_EQ(cfg.threshold(), 0.1);
    EXPECT_NEAR((LshConfig{20, 5, 4, 1}.threshold()), std::pow(0.2, 0.25), 1e-15);
}

TEST(LshConfig, BandsTimesRowsMustEqualPermutations) {
    EXPECT_THROW((LshConfig{10, 3, 4, 1}.validate()), ConfigError);
    EXPECT_THROW((LshConfig{0, 0, 1, 1}.validate()), ConfigError);
    EXPECT_THROW(LshIndex(LshConfig{10, 3, 4, 1}, {}), ConfigError);
}

TEST(MinHash, DeterministicAndSentinel) {
    LshConfig cfg;
    auto s = make_set({1, 2, 3, 99});
    EXPECT_EQ(minhash_signature(s, cfg), minhash_signature(s, cfg));
    auto empty = minhash_signature(ShingleSet{5, {}}, cfg);
    EXPECT_EQ(empty.values, std::vector<std::uint64_t>(10, minhash_empty));
    EXPECT_EQ(empty, empty_signature(cfg));
    LshConfig other = cfg;
    other.seed = 77;
    EXPECT_NE(minhash_signature(s, cfg).values, minhash_signature(s, other).values);
}

TEST(MinHash, HalfOverlapEstimate) {
    std::mt19937_64 rng(21);
    LshConfig cfg{512, 512, 1, 3};
    auto [a, b] = constructed_pair(rng, 300, 150);
    ASSERT_EQ(a.size() + b.size() - 150, 300u);  // exact Jaccard 0.5
    EXPECT_NEAR(estimate_jaccard(minhash_signature(a, cfg), minhash_signature(b, cfg)), 0.5, 0.1);
}

TEST(MinHash, EstimateExamples) {
    MinHashSignature a{{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0};
    MinHashSignature b{{1, 2, 3, 4, 5, 0, 0, 0, 0, 0}, 0};
    MinHashSignature c{{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 0};
    EXPECT_EQ(estimate_jaccard(a, a), 1.0);
    EXPECT_EQ(estimate_jaccard(a, c), 0.0);
    EXPECT_EQ(estimate_jaccard(a, b), 0.5);
    MinHashSignature shorter{{1, 2}, 0};
    EXPECT_THROW(estimate_jaccard(a, shorter), ConfigError);
    MinHashSignature other_family{a.values, 1};
    EXPECT_THROW(estimate_jaccard(a, other_family), ConfigError);
}

TEST(MinHash, MergeEqualsUnionSignature) {
    std::mt19937_64 rng(22);
    LshConfig cfg{64, 64, 1, 9};
    const auto empty = empty_signature(cfg);
    for (int i = 0; i < 50; ++i) {
        auto a = random_set(rng, 5000, 300);
        auto b = random_set(rng, 5000, 300);
        auto sa = minhash_signature(a, cfg);
        auto sb = minhash_signature(b, cfg);
        EXPECT_EQ(merge_signatures(sa, sb), minhash_signature(set_union(a, b), cfg));
        EXPECT_EQ(merge_signatures(sa, empty), sa);
        EXPECT_EQ(merge_signatures(sa, sa), sa);
    }
    MinHashSignature shorter{{1}, cfg.seed};
    EXPECT_THROW(merge_signatures(empty, shorter), ConfigError);
}

TEST(MinHash, MergeIsASemilattice) {
    std::mt19937_64 rng(23);
    LshConfig cfg{16, 16, 1, 1};
    for (int i = 0; i < 200; ++i) {
        auto a = minhash_signature(random_set(rng, 200, 30), cfg);
        auto b = minhash_signature(random_set(rng, 200, 30), cfg);
        auto c = minhash_signature(random_set(rng, 200, 30), cfg);
        EXPECT_EQ(merge_signatures(a, b), merge_signatures(b, a));
        EXPECT_EQ(merge_signatures(merge_signatures(a, b), c), merge_signatures(a, merge_signatures(b, c)));
        EXPECT_EQ(merge_signatures(a, a), a);
    }
}

TEST(LshIndex, SelfCollisionAndEmptyQuery) {
    std::mt19937_64 rng(24);
    LshConfig cfg;
    std::vector<MinHashSignature> sigs;
    for (int i = 0; i < 30; ++i) {
        auto set = random_set(rng, 1u << 30, 50);
        set.shingles.push_back(std::uint64_t{1} << 40);  // never empty
        sigs.push_back(minhash_signature(set, cfg));
    }
    LshIndex ix(cfg, sigs);
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        auto hits = ix.query(sigs[i]);
        EXPECT_TRUE(std::binary_search(hits.begin(), hits.end(), i));
    }
    EXPECT_TRUE(ix.query(empty_signature(cfg)).empty());
}

TEST(LshIndex, EmptySetItemsCollideWithEmptyQuery) {
    LshConfig cfg;
    LshIndex ix(cfg, {minhash_signature(make_set({1, 2, 3}), cfg), empty_signature(cfg)});
    EXPECT_EQ(ix.query(empty_signature(cfg)), (std::vector<std::size_t>{1}));
}

TEST(LshIndex, SingleRowQueryEqualsSlotAgreement) {
    std::mt19937_64 rng(25);
    LshConfig cfg;
    for (int corpus = 0; corpus < 20; ++corpus) {
        std::vector<MinHashSignature> sigs;
        for (int i = 0; i < 60; ++i) sigs.push_back(minhash_signature(random_set(rng, 400, 40), cfg));
        LshIndex ix(cfg, sigs);
        for (int q = 0; q < 10; ++q) {
            auto query = minhash_signature(random_set(rng, 400, 40), cfg);
            std::vector<std::size_t> expected;
            for (std::size_t i = 0; i < sigs.size(); ++i) {
                if (estimate_jaccard(sigs[i], query) > 0.0) expected.push_back(i);
            }
            EXPECT_EQ(ix.query(query), expected);
        }
    }
}

TEST(LshIndex, MultiRowBandsNeedWholeBandAgreement) {
    LshConfig cfg{4, 2, 2, 0};
    MinHashSignature a{{1, 2, 3, 4}, 0}, b{{1, 9, 3, 4}, 0}, c{{1, 9, 7, 4}, 0};
    LshIndex ix(cfg, {a, b, c});
    EXPECT_EQ(ix.query(MinHashSignature{{1, 2, 0, 0}, 0}), (std::vector<std::size_t>{0}));
    EXPECT_EQ(ix.query(MinHashSignature{{0, 0, 3, 4}, 0}), (std::vector<std::size_t>{0, 1}));
    // equal values in different bands must not collide
    EXPECT_TRUE(ix.query(MinHashSignature{{3, 4, 1, 2}, 0}).empty());
    EXPECT_THROW(ix.query(MinHashSignature{{1, 2, 3}, 0}), ConfigError);
}

TEST(LshIndex, SignatureJsonExport) {
    MinHashSignature s{{1, minhash_empty}, 0};
    EXPECT_EQ(signature_to_json(s).dump(), "[1,18446744073709551615]");
}
