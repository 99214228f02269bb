#pragma once

// Reference implementations used only by tests. Each one takes the slow,
// obvious route so it stays independent of the optimized library code.

#include <divprio/divprio.hpp>

#include <set>
#include <string>
#include <vector>

namespace oracle {

inline std::set<std::string> shingles(const std::string& s, std::size_t k) {
    std::set<std::string> out;
    if (s.size() < k) return out;
    for (std::size_t i = 0; i + k <= s.size(); ++i) out.insert(s.substr(i, k));
    return out;
}

inline double jaccard_distance(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    const std::size_t uni = a.size() + b.size() - inter;
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

inline double manhattan(std::vector<long long> a, std::vector<long long> b) {
    const auto n = std::max(a.size(), b.size());
    a.resize(n, 0);
    b.resize(n, 0);
    long long s = 0;
    for (std::size_t i = 0; i < n; ++i) s += std::llabs(a[i] - b[i]);
    return static_cast<double>(s);
}

/// distance(t, S) = min over u in S, u != t, recomputed from scratch.
inline double distance_to_set(std::size_t t, const std::vector<std::size_t>& set, const divprio::DistanceMatrix& m) {
    double best = 1e300;
    for (auto u : set) {
        if (u != t) best = std::min(best, m(t, u));
    }
    return best;
}

/// Greedy max-min (or min-min) exactly as the textbook loop reads, with the
/// lowest manifest index winning ties.
inline std::vector<std::size_t> pairwise_order(const divprio::DistanceMatrix& m, bool maximize) {
    const std::size_t n = m.size();
    std::vector<std::size_t> ts(n);
    for (std::size_t i = 0; i < n; ++i) ts[i] = i;
    std::vector<std::size_t> ps;
    if (n == 1) return {0};
    auto pick = [&](const std::vector<std::size_t>& reference) {
        std::size_t best_pos = 0;
        double best = distance_to_set(ts[0], reference, m);
        for (std::size_t p = 1; p < ts.size(); ++p) {
            const double d = distance_to_set(ts[p], reference, m);
            if (maximize ? d > best : d < best) {
                best = d;
                best_pos = p;
            }
        }
        return best_pos;
    };
    auto first = pick(ts);
    ps.push_back(ts[first]);
    ts.erase(ts.begin() + static_cast<std::ptrdiff_t>(first));
    while (!ts.empty()) {
        auto p = pick(ps);
        ps.push_back(ts[p]);
        ts.erase(ts.begin() + static_cast<std::ptrdiff_t>(p));
    }
    return ps;
}

/// Multiset greedy recomputing every candidate's score from a fresh stream.
inline std::vector<std::size_t> ncd_ms_order(const divprio::TestSuite& suite, const divprio::Compressor& c) {
    std::vector<std::size_t> remaining(suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) remaining[i] = i;
    std::vector<const divprio::TestCase*> ps;
    std::vector<std::size_t> order;
    while (!remaining.empty()) {
        std::size_t best_pos = 0;
        double best = -1e300;
        for (std::size_t p = 0; p < remaining.size(); ++p) {
            const double s = divprio::ncd_ms_score(suite[remaining[p]], ps, c);
            if (s > best) {
                best = s;
                best_pos = p;
            }
        }
        order.push_back(remaining[best_pos]);
        ps.push_back(&suite[remaining[best_pos]]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
    return order;
}

/// Walks the order, recording the first position at which each fault fires.
inline double apfd_walk(const std::vector<std::string>& order, const std::vector<std::set<std::string>>& detecting) {
    const double n = static_cast<double>(order.size());
    const double m = static_cast<double>(detecting.size());
    std::vector<std::size_t> first(detecting.size(), 0);
    std::size_t found = 0;
    for (std::size_t pos = 0; pos < order.size() && found < detecting.size(); ++pos) {
        for (std::size_t f = 0; f < detecting.size(); ++f) {
            if (first[f] == 0 && detecting[f].count(order[pos])) {
                first[f] = pos + 1;
                ++found;
            }
        }
    }
    std::size_t sum = 0;
    for (auto tf : first) sum += tf;
    return 100.0 * (1.0 - static_cast<double>(sum) / (n * m) + 1.0 / (2.0 * n));
}

/// Two-sided exact Mann-Whitney p by enumerating every assignment of pooled
/// positions to the first sample (small samples only).
inline double mann_whitney_exact(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::size_t n = pooled.size();
    const std::size_t k = x.size();
    // U for an assignment: pairs (i in X, j in Y) with pooled[i] > pooled[j] + 0.5 ties
    auto u_of = [&](const std::vector<char>& in_x) {
        double u = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_x[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (in_x[j]) continue;
                if (pooled[i] > pooled[j]) u += 1;
                else if (pooled[i] == pooled[j]) u += 0.5;
            }
        }
        return u;
    };
    std::vector<char> observed(n, 0);
    for (std::size_t i = 0; i < k; ++i) observed[i] = 1;
    const double centre = static_cast<double>(k * (n - k)) / 2.0;
    const double dev = std::abs(u_of(observed) - centre);
    std::vector<char> mask(n, 0);
    std::fill(mask.end() - static_cast<std::ptrdiff_t>(k), mask.end(), 1);
    double extreme = 0, total = 0;
    do {
        total += 1;
        if (std::abs(u_of(mask) - centre) >= dev - 1e-12) extreme += 1;
    } while (std::next_permutation(mask.begin(), mask.end()));
    return extreme / total;
}

}  // namespace oracle
