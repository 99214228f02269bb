#pragma once

// MinHash signatures over shingle sets and a banded LSH index.

#include <divprio/corpus.hpp>

#include <json.hpp>

#include <cmath>
#include <limits>

namespace divprio {

struct LshConfig {
    std::size_t permutations = 10;
    std::size_t bands = 10;
    std::size_t rows = 1;
    std::uint64_t seed = 0x5eed;

    void validate() const {
        if (permutations == 0 || bands == 0 || rows == 0) {
            throw ConfigError("lsh: permutations, bands and rows must all be positive");
        }
        if (bands * rows != permutations) {
            throw ConfigError("lsh: bands x rows must equal permutations (" + std::to_string(bands) + " x " +
                              std::to_string(rows) + " = " + std::to_string(bands * rows) +
                              " != " + std::to_string(permutations) + ")");
        }
    }

    /// Approximate similarity threshold (1/b)^(1/r).
    double threshold() const {
        return std::pow(1.0 / static_cast<double>(bands), 1.0 / static_cast<double>(rows));
    }

    bool operator==(const LshConfig&) const = default;
};

inline constexpr std::uint64_t minhash_empty = std::numeric_limits<std::uint64_t>::max();

/// values[p] = min over the set of h_p(shingle); all slots hold minhash_empty
/// for the empty set. A real minimum equal to minhash_empty is possible but has
/// probability 2^-64 per element.
struct MinHashSignature {
    std::vector<std::uint64_t> values;
    std::uint64_t seed = 0;

    std::size_t size() const { return values.size(); }
    bool operator==(const MinHashSignature&) const = default;
};

/// Hash family: h_p(x) = mix(mix(x) xor key_p), key_p derived from the seed
/// and the slot counter p.
class MinHashFamily {
public:
    MinHashFamily(std::size_t permutations, std::uint64_t seed) : seed_(seed), keys_(permutations) {
        for (std::size_t p = 0; p < permutations; ++p) {
            keys_[p] = hash::mix64(seed ^ hash::mix64(0xa0761d6478bd642fULL * (p + 1)));
        }
    }

    std::size_t size() const { return keys_.size(); }
    std::uint64_t seed() const { return seed_; }

    std::uint64_t operator()(std::size_t p, std::uint64_t element) const {
        return hash::mix64(hash::mix64(element) ^ keys_[p]);
    }

    MinHashSignature empty_signature() const { return {std::vector<std::uint64_t>(keys_.size(), minhash_empty), seed_}; }

    MinHashSignature sign(const ShingleSet& set) const {
        auto sig = empty_signature();
        for (auto element : set.shingles) {
            const auto pre = hash::mix64(element);
            for (std::size_t p = 0; p < keys_.size(); ++p) {
                sig.values[p] = std::min(sig.values[p], hash::mix64(pre ^ keys_[p]));
            }
        }
        return sig;
    }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> keys_;
};

inline MinHashSignature minhash_signature(const ShingleSet& set, const LshConfig& config) {
    return MinHashFamily(config.permutations, config.seed).sign(set);
}

inline MinHashSignature empty_signature(const LshConfig& config) {
    return {std::vector<std::uint64_t>(config.permutations, minhash_empty), config.seed};
}

namespace detail {
inline void check_compatible(const MinHashSignature& a, const MinHashSignature& b, const char* what) {
    if (a.size() != b.size()) {
        throw ConfigError(std::string(what) + ": signature lengths differ (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    }
    if (a.seed != b.seed) throw ConfigError(std::string(what) + ": signatures come from different hash families");
}
}  // namespace detail

/// Fraction of slots on which the two signatures agree.
inline double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    detail::check_compatible(a, b, "estimate_jaccard");
    if (a.size() == 0) return 0.0;
    std::size_t agree = 0;
    for (std::size_t p = 0; p < a.size(); ++p) agree += a.values[p] == b.values[p];
    return static_cast<double>(agree) / static_cast<double>(a.size());
}

/// Slot-wise minimum: the signature of the union of the two underlying sets.
inline MinHashSignature merge_signatures(const MinHashSignature& a, const MinHashSignature& b) {
    detail::check_compatible(a, b, "merge_signatures");
    MinHashSignature out = a;
    for (std::size_t p = 0; p < out.size(); ++p) out.values[p] = std::min(out.values[p], b.values[p]);
    return out;
}

inline void merge_into(MinHashSignature& acc, const MinHashSignature& other) {
    detail::check_compatible(acc, other, "merge_signatures");
    for (std::size_t p = 0; p < acc.size(); ++p) acc.values[p] = std::min(acc.values[p], other.values[p]);
}

/// Signature as a JSON array of unsigned integers.
inline nlohmann::json signature_to_json(const MinHashSignature& sig) { return sig.values; }

/// Banded index: band i of a signature hashes (i, rows values) to a bucket.
/// Immutable once built; queries are safe from multiple threads.
class LshIndex {
public:
    LshIndex(LshConfig config, std::vector<MinHashSignature> signatures)
        : config_(config), signatures_(std::move(signatures)), buckets_(config.bands) {
        config_.validate();
        for (std::size_t item = 0; item < signatures_.size(); ++item) {
            check(signatures_[item]);
            for (std::size_t band = 0; band < config_.bands; ++band) {
                buckets_[band][band_key(signatures_[item], band)].push_back(item);
            }
        }
    }

    const LshConfig& config() const { return config_; }
    std::size_t size() const { return signatures_.size(); }
    const MinHashSignature& signature(std::size_t item) const { return signatures_[item]; }
    const std::vector<MinHashSignature>& signatures() const { return signatures_; }

    std::uint64_t band_key(const MinHashSignature& sig, std::size_t band) const {
        std::uint64_t h = hash::mix64(band + 1);
        const auto first = band * config_.rows;
        for (std::size_t r = 0; r < config_.rows; ++r) h = hash::combine(h, sig.values[first + r]);
        return h;
    }

    /// Items sharing at least one band key with `q`, ascending.
    std::vector<std::size_t> query(const MinHashSignature& q) const {
        check(q);
        std::vector<std::size_t> out;
        for (std::size_t band = 0; band < config_.bands; ++band) {
            auto it = buckets_[band].find(band_key(q, band));
            if (it != buckets_[band].end()) out.insert(out.end(), it->second.begin(), it->second.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Membership mask form of query(), for the prioritization loop.
    void query_mask(const MinHashSignature& q, std::vector<char>& hit) const {
        check(q);
        hit.assign(signatures_.size(), 0);
        for (std::size_t band = 0; band < config_.bands; ++band) {
            auto it = buckets_[band].find(band_key(q, band));
            if (it == buckets_[band].end()) continue;
            for (auto item : it->second) hit[item] = 1;
        }
    }

    std::size_t bucket_count(std::size_t band) const { return buckets_[band].size(); }

private:
    void check(const MinHashSignature& sig) const {
        if (sig.size() != config_.permutations || sig.seed != config_.seed) {
            throw ConfigError("lsh: signature does not match the index configuration");
        }
    }

    LshConfig config_;
    std::vector<MinHashSignature> signatures_;
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> buckets_;
};

}  // namespace divprio
