#pragma once

// Non-parametric comparison statistics: Mann-Whitney U, Vargha-Delaney A,
// and BCa bootstrap intervals for the mean.

#include <divprio/common.hpp>

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numeric>
#include <random>

namespace divprio {

namespace stats {

inline double normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }
inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

inline double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Midranks (1-based) of the pooled sample; ties share the average rank.
inline std::vector<double> midranks(std::span<const double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Sample sizes below this (for the smaller sample) use the exact
/// permutation distribution.
inline constexpr std::size_t mann_whitney_exact_below = 8;

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of x
    double p_value = 1.0;
    bool exact = false;
};

/// Two-sided Mann-Whitney U test.
///
/// Small samples: exact permutation distribution of the rank sum, using the
/// observed midranks, so ties are handled exactly. Otherwise: normal
/// approximation with tie-corrected variance and a 0.5 continuity correction.
inline MannWhitneyResult mann_whitney(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ConfigError("mann_whitney_u: both samples must be non-empty");
    const std::size_t n1 = x.size();
    const std::size_t n2 = y.size();
    const std::size_t total = n1 + n2;
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto ranks = midranks(pooled);

    const double rank_sum_x = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
    MannWhitneyResult res;
    res.u = rank_sum_x - static_cast<double>(n1 * (n1 + 1)) / 2.0;

    if (std::min(n1, n2) < mann_whitney_exact_below) {
        res.exact = true;
        // Doubled midranks are integers; count subsets of size k by doubled
        // rank sum.
        const bool x_small = n1 <= n2;
        const std::size_t k = x_small ? n1 : n2;
        std::vector<std::int64_t> r2(total);
        for (std::size_t i = 0; i < total; ++i) r2[i] = std::llround(2.0 * ranks[i]);
        std::vector<std::int64_t> desc = r2;
        std::sort(desc.begin(), desc.end(), std::greater<>());
        const std::int64_t max_sum = std::accumulate(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(k), std::int64_t{0});
        std::vector<std::vector<long double>> ways(k + 1, std::vector<long double>(static_cast<std::size_t>(max_sum) + 1, 0.0L));
        ways[0][0] = 1.0L;
        for (std::size_t i = 0; i < total; ++i) {
            const auto r = static_cast<std::size_t>(r2[i]);
            for (std::size_t j = std::min(k, i + 1); j >= 1; --j) {
                auto& dst = ways[j];
                const auto& src = ways[j - 1];
                for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s) {
                    if (src[s - r] != 0.0L) dst[s] += src[s - r];
                    if (s == r) break;
                }
            }
        }
        std::int64_t observed = 0;
        const std::size_t offset = x_small ? 0 : n1;
        for (std::size_t i = 0; i < k; ++i) observed += r2[offset + i];
        // the doubled rank sum has mean k (N + 1)
        const std::int64_t centre2 = static_cast<std::int64_t>(k * (total + 1));
        const std::int64_t dev = std::llabs(observed - centre2);
        long double extreme = 0.0L;
        long double all = 0.0L;
        for (std::size_t s = 0; s <= static_cast<std::size_t>(max_sum); ++s) {
            const auto w = ways[k][s];
            if (w == 0.0L) continue;
            all += w;
            if (std::llabs(static_cast<std::int64_t>(s) - centre2) >= dev) extreme += w;
        }
        res.p_value = std::min(1.0, static_cast<double>(extreme / all));
        return res;
    }

    const double d1 = static_cast<double>(n1);
    const double d2 = static_cast<double>(n2);
    const double dn = static_cast<double>(total);
    double tie_term = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < total;) {
            std::size_t j = i;
            while (j + 1 < total && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double mu = d1 * d2 / 2.0;
    const double var = d1 * d2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (var <= 0.0) {
        res.p_value = 1.0;
        return res;
    }
    const double z = std::max(0.0, std::abs(res.u - mu) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return res;
}

inline double mann_whitney_u(std::span<const double> x, std::span<const double> y) {
    return mann_whitney(x, y).p_value;
}

/// Vargha-Delaney A: P(X > Y) + 0.5 P(X = Y) over all pairs.
inline double vda(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ConfigError("vda: both samples must be non-empty");
    // counts are integers; halves are kept exact by doubling
    std::uint64_t twice = 0;
    for (double a : x) {
        for (double b : y) {
            if (a > b) twice += 2;
            else if (a == b) twice += 1;
        }
    }
    return static_cast<double>(twice) / (2.0 * static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

/// Conventional magnitude labels for A (cutoffs 0.56 / 0.64 / 0.71 on
/// max(A, 1 - A)).
inline std::string vda_magnitude(double a) {
    const double s = std::max(a, 1.0 - a);
    if (s >= 0.71) return "large";
    if (s >= 0.64) return "medium";
    if (s >= 0.56) return "small";
    return "negligible";
}

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Linear interpolation between order statistics (sorted input).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    q = std::clamp(q, 0.0, 1.0);
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// BCa bootstrap interval for the mean. Resampling uses mt19937_64(seed).
/// A sample whose values are all equal yields the degenerate interval
/// (v, v).
inline Interval bootstrap_ci_mean(std::span<const double> x, std::size_t replicates = 1000, double level = 0.95,
                                  std::uint64_t seed = 1) {
    if (x.size() < 2) throw ConfigError("bootstrap_ci_mean: need at least two observations");
    if (replicates < 2) throw ConfigError("bootstrap_ci_mean: need at least two replicates");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("bootstrap_ci_mean: level must be in (0, 1)");
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return {x[0], x[0]};

    const std::size_t n = x.size();
    const double theta = mean(x);

    std::mt19937_64 rng(seed);
    std::vector<double> boot(replicates);
    for (auto& b : boot) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[bounded_uniform(rng, n)];
        b = s / static_cast<double>(n);
    }
    std::sort(boot.begin(), boot.end());

    // bias correction
    const auto below = static_cast<double>(std::lower_bound(boot.begin(), boot.end(), theta) - boot.begin());
    const auto equal = static_cast<double>(std::upper_bound(boot.begin(), boot.end(), theta) - boot.begin()) - below;
    const double reps = static_cast<double>(replicates);
    const double prop = std::clamp((below + 0.5 * equal) / reps, 0.5 / reps, 1.0 - 0.5 / reps);
    const double z0 = normal_quantile(prop);

    // acceleration from the jackknife
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    std::vector<double> jack(n);
    for (std::size_t i = 0; i < n; ++i) jack[i] = (total - x[i]) / static_cast<double>(n - 1);
    const double jack_mean = mean(jack);
    double num = 0.0;
    double den = 0.0;
    for (double j : jack) {
        const double d = jack_mean - j;
        num += d * d * d;
        den += d * d;
    }
    const double accel = den > 0.0 ? num / (6.0 * std::pow(den, 1.5)) : 0.0;

    auto adjusted = [&](double alpha) {
        const double z = normal_quantile(alpha);
        return normal_cdf(z0 + (z0 + z) / (1.0 - accel * (z0 + z)));
    };
    const double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(boot, adjusted(tail)), quantile_sorted(boot, adjusted(1.0 - tail))};
}

}  // namespace stats
}  // namespace divprio
