#pragma once

#include <divprio/corpus.hpp>

namespace divprio {

struct ApfdResult {
    std::string order_id;
    double apfd = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::size_t> tf;  // 1-based first-detection position per fault
};

/// Positions of each fault-matrix test in `order`. The order must be a
/// permutation of the matrix's test ids.
inline std::vector<std::size_t> order_positions(std::span<const std::string> order, const FaultMatrix& faults) {
    const std::size_t n = faults.n();
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(n);
    for (std::size_t i = 0; i < n; ++i) index.emplace(faults.test_ids[i], i);

    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> pos(n, unset);
    for (std::size_t p = 0; p < order.size(); ++p) {
        auto it = index.find(order[p]);
        if (it == index.end()) throw InputError("order contains unknown test id '" + order[p] + "'");
        if (pos[it->second] != unset) throw InputError("order lists test id '" + order[p] + "' more than once");
        pos[it->second] = p;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (pos[i] == unset) throw InputError("order is missing test id '" + faults.test_ids[i] + "'");
    }
    return pos;
}

/// APFD = 100 * (1 - sum(tf) / (n m) + 1 / (2 n)).
inline ApfdResult apfd(std::span<const std::string> order, const FaultMatrix& faults, std::string order_id = {}) {
    if (faults.m() == 0) throw InputError("apfd: fault matrix has no faults");
    const auto pos = order_positions(order, faults);
    ApfdResult r;
    r.order_id = std::move(order_id);
    r.n = faults.n();
    r.m = faults.m();
    r.tf.reserve(r.m);
    std::size_t sum = 0;
    for (const auto& detecting : faults.detects) {
        std::size_t first = r.n;
        for (auto t : detecting) first = std::min(first, pos[t]);
        r.tf.push_back(first + 1);
        sum += first + 1;
    }
    const double n = static_cast<double>(r.n);
    const double m = static_cast<double>(r.m);
    r.apfd = 100.0 * (1.0 - static_cast<double>(sum) / (n * m) + 1.0 / (2.0 * n));
    return r;
}

}  // namespace divprio
