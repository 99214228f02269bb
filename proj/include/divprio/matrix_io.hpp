#pragma once

// DistanceMatrix persistence: CSV export and a binary cache keyed by
// (metric parameters, suite content).

#include <divprio/metrics.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace divprio {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_matrix_csv(const DistanceMatrix& m) {
    std::string out = "id";
    for (const auto& id : m.ids()) {
        out += ',';
        out += detail::csv_escape(id);
    }
    out += '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += detail::csv_escape(m.ids()[i]);
        for (std::size_t j = 0; j < m.size(); ++j) {
            out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

inline std::uint64_t matrix_cache_key(const TestSuite& suite, const MetricParams& params) {
    return hash::combine(content_hash(suite), hash::fnv1a(as_bytes(params.describe())));
}

inline std::filesystem::path matrix_cache_path(const std::filesystem::path& dir, std::uint64_t key) {
    char name[32];
    std::snprintf(name, sizeof name, "%016llx.dpm", static_cast<unsigned long long>(key));
    return dir / name;
}

namespace detail {
inline constexpr char cache_magic[4] = {'D', 'P', 'D', 'M'};
inline constexpr std::uint32_t cache_version = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool read_pod(std::istream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}
}  // namespace detail

inline void save_matrix_cache(const DistanceMatrix& m, std::uint64_t key, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(detail::cache_magic, 4);
        detail::write_pod(out, detail::cache_version);
        detail::write_pod(out, key);
        const auto metric_len = static_cast<std::uint32_t>(m.metric().size());
        detail::write_pod(out, metric_len);
        out.write(m.metric().data(), metric_len);
        detail::write_pod(out, static_cast<std::uint64_t>(m.size()));
        for (const auto& id : m.ids()) {
            detail::write_pod(out, static_cast<std::uint32_t>(id.size()));
            out.write(id.data(), static_cast<std::streamsize>(id.size()));
        }
        out.write(reinterpret_cast<const char*>(m.data().data()),
                  static_cast<std::streamsize>(m.data().size() * sizeof(double)));
        if (!out) throw std::runtime_error("failed writing matrix cache '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

/// Returns the cached matrix if `path` holds one for exactly this key and
/// id list; any mismatch or corruption is treated as a miss.
inline std::optional<DistanceMatrix> load_matrix_cache(const std::filesystem::path& path, std::uint64_t key,
                                                       const std::vector<std::string>& ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t stored_key = 0;
    std::uint32_t metric_len = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, detail::cache_magic, 4) != 0) return std::nullopt;
    if (!detail::read_pod(in, version) || version != detail::cache_version) return std::nullopt;
    if (!detail::read_pod(in, stored_key) || stored_key != key) return std::nullopt;
    if (!detail::read_pod(in, metric_len) || metric_len > 4096) return std::nullopt;
    std::string metric(metric_len, '\0');
    if (!in.read(metric.data(), metric_len)) return std::nullopt;
    std::uint64_t n = 0;
    if (!detail::read_pod(in, n) || n != ids.size()) return std::nullopt;
    for (const auto& id : ids) {
        std::uint32_t len = 0;
        if (!detail::read_pod(in, len) || len != id.size()) return std::nullopt;
        std::string stored(len, '\0');
        if (!in.read(stored.data(), len) || stored != id) return std::nullopt;
    }
    DistanceMatrix m(std::move(metric), ids);
    if (!in.read(reinterpret_cast<char*>(m.data().data()), static_cast<std::streamsize>(n * n * sizeof(double)))) {
        return std::nullopt;
    }
    return m;
}

/// build_distance_matrix with an optional on-disk cache directory.
inline DistanceMatrix cached_distance_matrix(const TestSuite& suite, const MetricParams& params, std::size_t jobs,
                                             const std::optional<std::filesystem::path>& cache_dir) {
    if (!cache_dir) return build_distance_matrix(suite, params, jobs);
    const auto key = matrix_cache_key(suite, params);
    const auto path = matrix_cache_path(*cache_dir, key);
    if (auto hit = load_matrix_cache(path, key, suite.ids())) return std::move(*hit);
    auto m = build_distance_matrix(suite, params, jobs);
    save_matrix_cache(m, key, path);
    return m;
}

}  // namespace divprio
