#pragma once

// Similarity-based test prioritization: greedy max-min over a distance
// matrix, the compression multiset greedy, MinHash/LSH, and baselines.
// Ties always go to the lowest manifest index.

#include <divprio/lsh.hpp>
#include <divprio/matrix_io.hpp>
#include <divprio/metrics.hpp>

#include <json.hpp>

#include <cctype>
#include <chrono>
#include <random>

namespace divprio {

enum class Technique { rnd, mnh, jac, ncd, ncd_ms, lsh, sc };

inline constexpr Technique all_techniques[] = {Technique::rnd, Technique::mnh,    Technique::jac, Technique::ncd,
                                               Technique::sc,  Technique::ncd_ms, Technique::lsh};

inline std::string acronym(Technique t) {
    switch (t) {
        case Technique::rnd: return "RND";
        case Technique::mnh: return "MNH";
        case Technique::jac: return "JAC";
        case Technique::ncd: return "NCD";
        case Technique::ncd_ms: return "NCD-MS";
        case Technique::lsh: return "LSH";
        case Technique::sc: return "SC";
    }
    return "?";
}

inline std::optional<Technique> parse_technique(std::string_view s) {
    std::string upper(s);
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (upper == "NCD_MS") upper = "NCD-MS";
    for (auto t : all_techniques) {
        if (acronym(t) == upper) return t;
    }
    return std::nullopt;
}

struct PrioritizedOrder {
    std::string technique;
    nlohmann::json params = nlohmann::json::object();
    std::optional<std::uint64_t> seed;
    std::vector<std::size_t> indices;  // manifest indices, execution order
    std::vector<std::string> order;    // ids, parallel to indices
    std::vector<double> scores;        // score that won each step
    double prep_seconds = 0.0;
    double algo_seconds = 0.0;

    double elapsed() const { return prep_seconds + algo_seconds; }
};

namespace detail {
inline void fill_ids(PrioritizedOrder& out, const TestSuite& suite) {
    out.order.clear();
    out.order.reserve(out.indices.size());
    for (auto i : out.indices) out.order.push_back(suite[i].id);
}

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}
}  // namespace detail

enum class PairwiseMode { maximize, minimize };

/// Greedy max-min ordering (min-min when minimizing). Each unselected test
/// carries its current distance to the prioritized set, updated after every
/// pick, so a run costs O(n^2) matrix reads.
inline PrioritizedOrder prioritize_pairwise(const TestSuite& suite, const DistanceMatrix& matrix,
                                            PairwiseMode mode = PairwiseMode::maximize) {
    const std::size_t n = suite.size();
    if (n == 0) throw ConfigError("prioritize_pairwise: suite is empty");
    if (matrix.size() != n || matrix.ids() != suite.ids()) {
        throw ConfigError("prioritize_pairwise: distance matrix ids do not match the suite");
    }
    PrioritizedOrder out;
    out.params = {{"metric", matrix.metric()}, {"mode", mode == PairwiseMode::maximize ? "maximize" : "minimize"}};
    if (n == 1) {
        out.indices = {0};
        out.scores = {0.0};
        detail::fill_ids(out, suite);
        return out;
    }

    const bool maximize = mode == PairwiseMode::maximize;
    auto better = [maximize](double candidate, double best) {
        return maximize ? candidate > best : candidate < best;
    };

    // Seed: distance of each test to the whole suite.
    std::vector<double> current(n);
    for (std::size_t t = 0; t < n; ++t) {
        double best = std::numeric_limits<double>::infinity();
        auto row = matrix.row(t);
        for (std::size_t u = 0; u < n; ++u) {
            if (u != t) best = std::min(best, row[u]);
        }
        current[t] = best;
    }

    std::vector<char> selected(n, 0);
    out.indices.reserve(n);
    out.scores.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t pick = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (selected[t]) continue;
            if (pick == n || better(current[t], current[pick])) pick = t;
        }
        out.indices.push_back(pick);
        out.scores.push_back(current[pick]);
        selected[pick] = 1;
        if (step == 0) {
            // the prioritized set is now {pick}; drop the suite-wide seed values
            for (std::size_t t = 0; t < n; ++t) current[t] = matrix(t, pick);
        } else {
            auto row = matrix.row(pick);
            for (std::size_t t = 0; t < n; ++t) current[t] = std::min(current[t], row[t]);
        }
    }
    detail::fill_ids(out, suite);
    return out;
}

/// Greedy multiset compression ordering: repeatedly take the test whose
/// marginal compressed size given the already prioritized tests is largest.
/// The first pick is therefore the test with the largest standalone size.
inline PrioritizedOrder prioritize_ncd_ms(const TestSuite& suite, const Compressor& compressor,
                                          std::size_t jobs = 1) {
    const std::size_t n = suite.size();
    if (n == 0) throw ConfigError("prioritize_ncd_ms: suite is empty");
    std::size_t total = 0;
    for (const auto& t : suite) total += t.length();

    PrioritizedOrder out;
    out.params = {{"compressor", compressor.name()}};
    auto stream = compressor.stream(total);
    std::vector<std::size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    std::vector<double> marginal(n);
    while (!remaining.empty()) {
        const auto base = static_cast<double>(stream->size());
        parallel_for(remaining.size(), jobs, [&](std::size_t r) {
            marginal[r] = static_cast<double>(stream->size_with(suite[remaining[r]].bytes())) - base;
        });
        std::size_t best = 0;
        for (std::size_t r = 1; r < remaining.size(); ++r) {
            if (marginal[r] > marginal[best]) best = r;
        }
        const auto pick = remaining[best];
        if (marginal[best] < 0) warn("negative marginal compressed size for test '" + suite[pick].id + "'");
        out.indices.push_back(pick);
        out.scores.push_back(marginal[best]);
        stream->append(suite[pick].bytes());
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    detail::fill_ids(out, suite);
    return out;
}

inline nlohmann::json lsh_params(const LshConfig& config, std::size_t shingle_k) {
    return {{"permutations", config.permutations},
            {"bands", config.bands},
            {"rows", config.rows},
            {"hash_seed", config.seed},
            {"shingle_k", shingle_k}};
}

/// LSH ordering over a prebuilt index. The query is the cumulative signature
/// of the prioritized set; each step picks, among unselected tests that do not
/// collide with the query, the one with the largest estimated Jaccard distance
/// to it. When every unselected test collides, the pick is made among the
/// colliding ones by the same criterion.
inline PrioritizedOrder prioritize_lsh(const TestSuite& suite, const LshIndex& index) {
    const std::size_t n = suite.size();
    if (n == 0) throw ConfigError("prioritize_lsh: suite is empty");
    if (index.size() != n) throw ConfigError("prioritize_lsh: index does not cover the suite");

    PrioritizedOrder out;
    auto query = empty_signature(index.config());
    std::vector<char> selected(n, 0);
    std::vector<char> candidate;
    out.indices.reserve(n);
    out.scores.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        index.query_mask(query, candidate);
        std::size_t pick = n;
        double best = -1.0;
        for (int pass = 0; pass < 2 && pick == n; ++pass) {
            // pass 0: distant set; pass 1: fallback to colliding tests
            for (std::size_t t = 0; t < n; ++t) {
                if (selected[t] || (pass == 0 && candidate[t])) continue;
                const double d = 1.0 - estimate_jaccard(index.signature(t), query);
                if (d > best) {
                    best = d;
                    pick = t;
                }
            }
        }
        out.indices.push_back(pick);
        out.scores.push_back(best);
        selected[pick] = 1;
        merge_into(query, index.signature(pick));
    }
    detail::fill_ids(out, suite);
    return out;
}

inline LshIndex build_lsh_index(const TestSuite& suite, const LshConfig& config, std::size_t shingle_k,
                                std::size_t jobs = 1) {
    config.validate();
    MinHashFamily family(config.permutations, config.seed);
    std::vector<MinHashSignature> sigs(suite.size());
    parallel_for(suite.size(), jobs, [&](std::size_t i) { sigs[i] = family.sign(to_shingle_set(suite[i], shingle_k)); });
    return LshIndex(config, std::move(sigs));
}

inline PrioritizedOrder prioritize_lsh(const TestSuite& suite, const LshConfig& config, std::size_t shingle_k = 5,
                                       std::size_t jobs = 1) {
    auto out = prioritize_lsh(suite, build_lsh_index(suite, config, shingle_k, jobs));
    out.params = lsh_params(config, shingle_k);
    return out;
}

/// Fisher-Yates shuffle of the manifest order driven by mt19937_64(seed).
inline PrioritizedOrder prioritize_random(const TestSuite& suite, std::uint64_t seed) {
    const std::size_t n = suite.size();
    PrioritizedOrder out;
    out.seed = seed;
    out.indices.resize(n);
    std::iota(out.indices.begin(), out.indices.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded_uniform(rng, i));
        std::swap(out.indices[i - 1], out.indices[j]);
    }
    out.scores.assign(n, 0.0);
    detail::fill_ids(out, suite);
    return out;
}

// ---------------------------------------------------------------------------
// Technique dispatch with timing

struct TechniqueOptions {
    std::size_t shingle_k = 5;
    std::string compressor = "lz4";
    LshConfig lsh{};
    std::uint64_t seed = 0;  // random baseline only
    std::size_t jobs = 1;
    std::optional<std::filesystem::path> cache_dir;
};

inline MetricParams metric_for(Technique t, const TechniqueOptions& opts) {
    MetricParams p;
    p.shingle_k = opts.shingle_k;
    p.compressor = opts.compressor;
    switch (t) {
        case Technique::mnh: p.metric = Metric::manhattan; break;
        case Technique::jac: p.metric = Metric::jaccard; break;
        case Technique::ncd:
        case Technique::sc: p.metric = Metric::ncd; break;
        default: throw ConfigError(acronym(t) + " does not use a distance matrix");
    }
    return p;
}

/// Runs one technique end to end. prep_seconds covers the distance matrix or
/// index construction, algo_seconds the ordering loop.
inline PrioritizedOrder prioritize(const TestSuite& suite, Technique technique, const TechniqueOptions& opts) {
    if (suite.empty()) throw ConfigError("cannot prioritize an empty suite");
    using detail::Clock;
    PrioritizedOrder out;
    switch (technique) {
        case Technique::rnd: {
            auto start = Clock::now();
            out = prioritize_random(suite, opts.seed);
            out.algo_seconds = detail::seconds_since(start);
            break;
        }
        case Technique::mnh:
        case Technique::jac:
        case Technique::ncd:
        case Technique::sc: {
            const auto params = metric_for(technique, opts);
            auto start = Clock::now();
            auto matrix = cached_distance_matrix(suite, params, opts.jobs, opts.cache_dir);
            const double prep = detail::seconds_since(start);
            start = Clock::now();
            out = prioritize_pairwise(suite, matrix,
                                      technique == Technique::sc ? PairwiseMode::minimize : PairwiseMode::maximize);
            out.algo_seconds = detail::seconds_since(start);
            out.prep_seconds = prep;
            out.params = {{"metric", to_string(params.metric)},
                          {"mode", technique == Technique::sc ? "minimize" : "maximize"}};
            if (params.metric == Metric::jaccard) out.params["shingle_k"] = params.shingle_k;
            if (params.metric == Metric::ncd) out.params["compressor"] = params.compressor;
            break;
        }
        case Technique::ncd_ms: {
            auto start = Clock::now();
            auto compressor = make_compressor(opts.compressor);
            const double prep = detail::seconds_since(start);
            start = Clock::now();
            out = prioritize_ncd_ms(suite, *compressor, opts.jobs);
            out.algo_seconds = detail::seconds_since(start);
            out.prep_seconds = prep;
            break;
        }
        case Technique::lsh: {
            auto start = Clock::now();
            auto index = build_lsh_index(suite, opts.lsh, opts.shingle_k, opts.jobs);
            const double prep = detail::seconds_since(start);
            start = Clock::now();
            out = prioritize_lsh(suite, index);
            out.algo_seconds = detail::seconds_since(start);
            out.prep_seconds = prep;
            out.params = lsh_params(opts.lsh, opts.shingle_k);
            break;
        }
    }
    out.technique = acronym(technique);
    return out;
}

}  // namespace divprio
