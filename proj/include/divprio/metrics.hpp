#pragma once

#include <divprio/compressor.hpp>
#include <divprio/corpus.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace divprio {

/// Sum of absolute component differences; the shorter vector is zero-padded.
inline double manhattan(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::uint64_t sum = 0;
    const std::size_t common = b.size();
    for (std::size_t i = 0; i < common; ++i) {
        const std::int64_t d = static_cast<std::int64_t>(a[i]) - static_cast<std::int64_t>(b[i]);
        sum += static_cast<std::uint64_t>(d < 0 ? -d : d);
    }
    for (std::size_t i = common; i < a.size(); ++i) sum += a[i];
    return static_cast<double>(sum);
}

/// Sorted-merge intersection count. The loop is written without data-dependent
/// branches; on shingle sets the comparison outcome is close to random and
/// mispredictions dominate the branchy version.
inline std::size_t intersection_size(const ShingleSet& a, const ShingleSet& b) {
    const std::uint64_t* i = a.shingles.data();
    const std::uint64_t* j = b.shingles.data();
    const std::uint64_t* const ie = i + a.shingles.size();
    const std::uint64_t* const je = j + b.shingles.size();
    std::size_t count = 0;
    while (i != ie && j != je) {
        const std::uint64_t x = *i;
        const std::uint64_t y = *j;
        count += x == y;
        i += x <= y;
        j += y <= x;
    }
    return count;
}

/// 1 - |a ∩ b| / |a ∪ b|. Two empty sets are at distance 0.
inline double jaccard_distance(const ShingleSet& a, const ShingleSet& b) {
    if (a.k != b.k) {
        throw ConfigError("jaccard_distance: shingle lengths differ (" + std::to_string(a.k) + " vs " +
                          std::to_string(b.k) + ")");
    }
    if (a.empty() && b.empty()) return 0.0;
    const auto inter = intersection_size(a, b);
    const auto uni = a.size() + b.size() - inter;
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Normalized compression distance

inline constexpr double ncd_report_threshold = 1.2;

/// NCD from precomputed sizes: (C(xy) - min(C(x), C(y))) / max(C(x), C(y)).
inline double ncd_from_sizes(std::size_t cx, std::size_t cy, std::size_t cxy) {
    const auto lo = std::min(cx, cy);
    const auto hi = std::max(cx, cy);
    if (hi == 0) return 0.0;
    const double d = (static_cast<double>(cxy) - static_cast<double>(lo)) / static_cast<double>(hi);
    if (d > ncd_report_threshold) {
        warn("ncd value " + std::to_string(d) + " exceeds " + std::to_string(ncd_report_threshold) +
             " (reported unclamped)");
    }
    return d;
}

inline std::size_t concat_compressed_size(ByteView first, ByteView second, const Compressor& c) {
    thread_local Bytes buf;
    buf.assign(first.begin(), first.end());
    buf.insert(buf.end(), second.begin(), second.end());
    return c.compressed_size(buf);
}

/// NCD over raw bytes. The concatenation puts the lexicographically smaller
/// sequence first, so ncd(a, b) == ncd(b, a) exactly.
inline double ncd(ByteView a, ByteView b, const Compressor& c) {
    if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end())) std::swap(a, b);
    return ncd_from_sizes(c.compressed_size(a), c.compressed_size(b), concat_compressed_size(a, b, c));
}

/// NCD between test cases; the test with the smaller id goes first.
inline double ncd(const TestCase& a, const TestCase& b, const Compressor& c) {
    const auto& first = a.id <= b.id ? a : b;
    const auto& second = a.id <= b.id ? b : a;
    return ncd_from_sizes(c.compressed_size(first.bytes()), c.compressed_size(second.bytes()),
                          concat_compressed_size(first.bytes(), second.bytes(), c));
}

/// Marginal compressed size of `candidate` given the concatenated sources of
/// `prioritized`: C(P · t) - C(P), measured with the compressor's stream.
/// Larger means less shared information with the prioritized set.
inline double ncd_ms_score(const TestCase& candidate, std::span<const TestCase* const> prioritized,
                           const Compressor& c) {
    std::size_t total = candidate.length();
    for (const auto* t : prioritized) total += t->length();
    auto stream = c.stream(total);
    for (const auto* t : prioritized) stream->append(t->bytes());
    const auto with = static_cast<double>(stream->size_with(candidate.bytes()));
    const auto without = static_cast<double>(stream->size());
    if (with < without) {
        warn("negative marginal compressed size for test '" + candidate.id + "'");
    }
    return with - without;
}

// ---------------------------------------------------------------------------
// Distance matrix

enum class Metric { manhattan, jaccard, ncd };

inline std::string to_string(Metric m) {
    switch (m) {
        case Metric::manhattan: return "manhattan";
        case Metric::jaccard: return "jaccard";
        case Metric::ncd: return "ncd";
    }
    return "?";
}

inline Metric parse_metric(std::string_view s) {
    if (s == "manhattan") return Metric::manhattan;
    if (s == "jaccard") return Metric::jaccard;
    if (s == "ncd") return Metric::ncd;
    throw ConfigError("unknown metric '" + std::string(s) + "' (expected manhattan, jaccard or ncd)");
}

struct MetricParams {
    Metric metric = Metric::ncd;
    std::size_t shingle_k = 5;
    std::string compressor = "lz4";

    /// Canonical parameter string; part of the cache key.
    std::string describe() const {
        switch (metric) {
            case Metric::manhattan: return "manhattan";
            case Metric::jaccard: return "jaccard(k=" + std::to_string(shingle_k) + ")";
            case Metric::ncd: return "ncd(compressor=" + compressor + ")";
        }
        return "?";
    }
};

/// Symmetric n x n distances with a zero diagonal, row-major.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(std::string metric, std::vector<std::string> ids)
        : metric_(std::move(metric)), ids_(std::move(ids)), d_(ids_.size() * ids_.size(), 0.0) {}

    const std::string& metric() const { return metric_; }
    const std::vector<std::string>& ids() const { return ids_; }
    std::size_t size() const { return ids_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return d_[i * ids_.size() + j]; }

    /// Writes both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double v) {
        d_[i * ids_.size() + j] = v;
        d_[j * ids_.size() + i] = v;
    }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(d_).subspan(i * ids_.size(), ids_.size());
    }
    const std::vector<double>& data() const { return d_; }
    std::vector<double>& data() { return d_; }

    bool operator==(const DistanceMatrix&) const = default;

private:
    std::string metric_;
    std::vector<std::string> ids_;
    std::vector<double> d_;
};

/// min { d(t, u) : u in set, u != t }. Throws when nothing remains after
/// excluding t.
inline double distance_to_set(std::size_t t, std::span<const std::size_t> set, const DistanceMatrix& m) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (auto u : set) {
        if (u == t) continue;
        best = std::min(best, m(t, u));
        any = true;
    }
    if (!any) throw ConfigError("distance_to_set: set is empty after excluding the test itself");
    return best;
}

namespace detail {

/// All pairwise Jaccard distances through an inverted index: for each test,
/// walk the posting lists of its shingles and count co-occurrences with
/// later tests. Same integers as the pairwise merge, so the same doubles, but
/// the work scales with shared shingles instead of with n^2 set lengths.
inline void fill_jaccard(DistanceMatrix& m, const std::vector<ShingleSet>& sets, std::size_t jobs) {
    const std::size_t n = sets.size();
    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
    std::size_t total = 0;
    for (const auto& s : sets) total += s.size();
    entries.reserve(total);
    for (std::size_t t = 0; t < n; ++t) {
        for (auto sh : sets[t].shingles) entries.emplace_back(sh, static_cast<std::uint32_t>(t));
    }
    std::sort(entries.begin(), entries.end());

    // postings of distinct shingle u: tests[start[u] .. start[u + 1]), ascending
    std::vector<std::uint64_t> keys;
    std::vector<std::size_t> start;
    std::vector<std::uint32_t> tests(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
        if (e == 0 || entries[e].first != entries[e - 1].first) {
            keys.push_back(entries[e].first);
            start.push_back(e);
        }
        tests[e] = entries[e].second;
    }
    start.push_back(entries.size());
    entries.clear();
    entries.shrink_to_fit();

    parallel_for(n - 1, jobs, [&](std::size_t i) {
        std::vector<std::uint32_t> inter(n, 0);
        for (auto sh : sets[i].shingles) {
            const auto u = static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), sh) - keys.begin());
            const auto* first = tests.data() + start[u];
            const auto* last = tests.data() + start[u + 1];
            // skip tests up to and including i
            first = std::upper_bound(first, last, static_cast<std::uint32_t>(i));
            for (; first != last; ++first) ++inter[*first];
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t a = sets[i].size();
            const std::size_t b = sets[j].size();
            double d = 0.0;
            if (a + b > 0) {
                const std::size_t uni = a + b - inter[j];
                d = 1.0 - static_cast<double>(inter[j]) / static_cast<double>(uni);
            }
            m.set(i, j, d);
        }
    });
}

}  // namespace detail

/// Per-test representations computed once before the pairwise pass.
struct PreparedSuite {
    std::vector<NumericVector> vectors;
    std::vector<ShingleSet> shingles;
    std::vector<std::size_t> compressed;
};

inline DistanceMatrix build_distance_matrix(const TestSuite& suite, const MetricParams& params,
                                            std::size_t jobs = 1) {
    const std::size_t n = suite.size();
    DistanceMatrix m(params.describe(), suite.ids());
    if (n < 2) return m;

    std::unique_ptr<Compressor> compressor;
    PreparedSuite prep;
    switch (params.metric) {
        case Metric::manhattan:
            prep.vectors.resize(n);
            parallel_for(n, jobs, [&](std::size_t i) { prep.vectors[i] = to_numeric_vector(suite[i]); });
            break;
        case Metric::jaccard:
            prep.shingles.resize(n);
            parallel_for(n, jobs, [&](std::size_t i) { prep.shingles[i] = to_shingle_set(suite[i], params.shingle_k); });
            break;
        case Metric::ncd:
            compressor = make_compressor(params.compressor);
            prep.compressed.resize(n);
            parallel_for(n, jobs, [&](std::size_t i) { prep.compressed[i] = compressor->compressed_size(suite[i].bytes()); });
            break;
    }

    if (params.metric == Metric::jaccard) {
        detail::fill_jaccard(m, prep.shingles, jobs);
        return m;
    }

    // Row i owns cells (i, j > i) and their mirrors, so workers never share a cell.
    parallel_for(n - 1, jobs, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = 0.0;
            switch (params.metric) {
                case Metric::manhattan: d = manhattan(prep.vectors[i], prep.vectors[j]); break;
                case Metric::jaccard: d = jaccard_distance(prep.shingles[i], prep.shingles[j]); break;
                case Metric::ncd: {
                    const bool i_first = suite[i].id <= suite[j].id;
                    const auto& a = i_first ? suite[i] : suite[j];
                    const auto& b = i_first ? suite[j] : suite[i];
                    d = ncd_from_sizes(prep.compressed[i], prep.compressed[j],
                                       concat_compressed_size(a.bytes(), b.bytes(), *compressor));
                    break;
                }
            }
            m.set(i, j, d);
        }
    });
    return m;
}

}  // namespace divprio
