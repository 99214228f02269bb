#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace divprio {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Raised for bad input data (manifests, fault matrices, order files).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid parameters or contract violations by the caller.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
    auto v = as_bytes(s);
    return {v.begin(), v.end()};
}

namespace hash {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t fnv1a(ByteView data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (auto b : data) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace hash

/// Runs fn(i) for i in [0, count) over `jobs` worker threads. Each index is
/// visited exactly once; the caller must write results to disjoint slots.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            try {
                // strided assignment keeps triangular workloads balanced
                for (std::size_t i = w; i < count; i += jobs) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Uniform in [0, bound) by rejection; independent of the standard library's
/// distribution implementations so results are portable.
inline std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

inline std::size_t default_jobs() {
    return std::max(1u, std::thread::hardware_concurrency());
}

using WarningSink = void (*)(std::string_view);

namespace detail {
inline void stderr_sink(std::string_view msg);
inline WarningSink& warning_sink() {
    static WarningSink sink = &stderr_sink;
    return sink;
}
}  // namespace detail

/// Replaces the process-wide warning sink; returns the previous one. A null
/// sink silences warnings.
inline WarningSink set_warning_sink(WarningSink sink) {
    auto prev = detail::warning_sink();
    detail::warning_sink() = sink;
    return prev;
}

inline void warn(std::string_view msg) {
    if (auto sink = detail::warning_sink()) sink(msg);
}

}  // namespace divprio

#include <iostream>

namespace divprio::detail {
inline void stderr_sink(std::string_view msg) {
    static std::mutex m;
    std::lock_guard lock(m);
    std::cerr << "warning: " << msg << '\n';
}

}  // namespace divprio
