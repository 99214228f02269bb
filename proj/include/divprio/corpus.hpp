#pragma once

// Test suite ingestion: manifests, fault matrices and the byte-level
// representations (numeric vectors, shingle sets) consumed by the metrics.

#include <divprio/common.hpp>

#include <json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace divprio {

struct TestCase {
    std::string id;
    Bytes source;

    std::size_t length() const { return source.size(); }
    ByteView bytes() const { return source; }
};

class CorpusError : public InputError {
public:
    enum class Kind {
        missing_file,
        duplicate_id,
        empty_manifest,
        malformed_manifest,
        malformed_row,
        unknown_test,
        undetected_fault,
    };

    CorpusError(Kind kind, std::string subject, const std::string& what)
        : InputError(what), kind_(kind), subject_(std::move(subject)) {}

    Kind kind() const { return kind_; }
    /// The offending entry: an id, a path, or a row number.
    const std::string& subject() const { return subject_; }

private:
    Kind kind_;
    std::string subject_;
};

/// An ordered collection of test cases with unique ids. Manifest order is the
/// identity permutation.
class TestSuite {
public:
    TestSuite() = default;

    explicit TestSuite(std::vector<TestCase> cases, std::string name = {})
        : name_(std::move(name)), cases_(std::move(cases)) {
        index_.reserve(cases_.size());
        for (std::size_t i = 0; i < cases_.size(); ++i) {
            const auto& id = cases_[i].id;
            if (id.empty()) {
                throw CorpusError(CorpusError::Kind::malformed_manifest, std::to_string(i),
                                  "test case #" + std::to_string(i) + " has an empty id");
            }
            if (!index_.emplace(id, i).second) {
                throw CorpusError(CorpusError::Kind::duplicate_id, id, "duplicate test id '" + id + "'");
            }
        }
    }

    const std::string& name() const { return name_; }
    std::size_t size() const { return cases_.size(); }
    bool empty() const { return cases_.empty(); }
    const TestCase& operator[](std::size_t i) const { return cases_[i]; }
    const std::vector<TestCase>& cases() const { return cases_; }
    auto begin() const { return cases_.begin(); }
    auto end() const { return cases_.end(); }

    std::optional<std::size_t> index_of(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        out.reserve(cases_.size());
        for (const auto& c : cases_) out.push_back(c.id);
        return out;
    }

private:
    std::string name_;
    std::vector<TestCase> cases_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Hash over ids, order and bytes; keys the distance-matrix cache.
inline std::uint64_t content_hash(const TestSuite& suite) {
    std::uint64_t h = hash::mix64(suite.size());
    for (const auto& c : suite) {
        h = hash::combine(h, hash::fnv1a(as_bytes(c.id)));
        h = hash::combine(h, hash::fnv1a(c.source));
    }
    return h;
}

struct Preprocessing {
    bool collapse_whitespace = false;
    bool lowercase = false;
};

inline Bytes preprocess(Bytes source, const Preprocessing& opts) {
    if (opts.lowercase) {
        for (auto& b : source) {
            if (b >= 'A' && b <= 'Z') b = static_cast<std::uint8_t>(b - 'A' + 'a');
        }
    }
    if (opts.collapse_whitespace) {
        Bytes out;
        out.reserve(source.size());
        bool in_space = false;
        for (auto b : source) {
            if (std::isspace(b)) {
                if (!in_space) out.push_back(' ');
                in_space = true;
            } else {
                out.push_back(b);
                in_space = false;
            }
        }
        source = std::move(out);
    }
    return source;
}

inline Bytes read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorpusError(CorpusError::Kind::missing_file, path.string(),
                          "cannot open file '" + path.string() + "'");
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Loads a JSON manifest `[{"id": ..., "path": ...}, ...]`. Relative paths
/// resolve against the manifest's directory.
inline TestSuite load_suite(const std::filesystem::path& manifest_path, const Preprocessing& opts = {}) {
    namespace fs = std::filesystem;
    if (!fs::exists(manifest_path)) {
        throw CorpusError(CorpusError::Kind::missing_file, manifest_path.string(),
                          "manifest not found: '" + manifest_path.string() + "'");
    }
    auto raw = read_file_bytes(manifest_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(raw.begin(), raw.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw CorpusError(CorpusError::Kind::malformed_manifest, manifest_path.string(),
                          "manifest '" + manifest_path.string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) {
        throw CorpusError(CorpusError::Kind::malformed_manifest, manifest_path.string(),
                          "manifest '" + manifest_path.string() + "' must be a JSON array");
    }
    if (doc.empty()) {
        throw CorpusError(CorpusError::Kind::empty_manifest, manifest_path.string(),
                          "manifest '" + manifest_path.string() + "' lists no tests");
    }

    const auto base = manifest_path.parent_path();
    std::vector<TestCase> cases;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        if (!entry.is_object() || !entry.contains("id") || !entry.contains("path") ||
            !entry["id"].is_string() || !entry["path"].is_string()) {
            throw CorpusError(CorpusError::Kind::malformed_manifest, std::to_string(i),
                              "manifest entry #" + std::to_string(i) + " needs string fields 'id' and 'path'");
        }
        auto id = entry["id"].get<std::string>();
        if (id.empty()) {
            throw CorpusError(CorpusError::Kind::malformed_manifest, std::to_string(i),
                              "manifest entry #" + std::to_string(i) + " has an empty id");
        }
        if (!seen.insert(id).second) {
            throw CorpusError(CorpusError::Kind::duplicate_id, id, "duplicate test id '" + id + "' in manifest");
        }
        fs::path path = entry["path"].get<std::string>();
        if (path.is_relative()) path = base / path;
        if (!fs::is_regular_file(path)) {
            throw CorpusError(CorpusError::Kind::missing_file, path.string(),
                              "test '" + id + "': source file not found: '" + path.string() + "'");
        }
        cases.push_back({std::move(id), preprocess(read_file_bytes(path), opts)});
    }
    auto name = manifest_path.parent_path().filename().string();
    return TestSuite(std::move(cases), std::move(name));
}

/// Writes each source under `source_dir` (relative to the manifest) and the
/// manifest itself. Reloading yields identical ids, order and bytes.
inline void save_suite(const TestSuite& suite, const std::filesystem::path& manifest_path,
                       const std::string& source_dir = "tests", const std::string& extension = ".txt") {
    namespace fs = std::filesystem;
    auto base = manifest_path.parent_path();
    if (!base.empty()) fs::create_directories(base / source_dir);
    else fs::create_directories(source_dir);
    nlohmann::json doc = nlohmann::json::array();
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto& c = suite[i];
        // file names are positional so arbitrary ids stay filesystem-safe
        auto rel = fs::path(source_dir) / ("t" + std::to_string(i) + extension);
        std::ofstream out(base / rel, std::ios::binary);
        out.write(reinterpret_cast<const char*>(c.source.data()), static_cast<std::streamsize>(c.source.size()));
        doc.push_back({{"id", c.id}, {"path", rel.generic_string()}});
    }
    std::ofstream out(manifest_path, std::ios::binary);
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Representations

/// One value per source byte.
using NumericVector = std::vector<std::uint32_t>;

inline NumericVector to_numeric_vector(const TestCase& tc) {
    return NumericVector(tc.source.begin(), tc.source.end());
}

/// Set of distinct k-byte substrings, held as a sorted vector of 64-bit codes.
/// For k <= 8 a code is the big-endian packing of the shingle bytes, which is
/// injective. For k > 8 codes are 64-bit hashes and distinct shingles may
/// collide (probability ~ s^2 / 2^65 for s shingles).
struct ShingleSet {
    std::size_t k = 5;
    std::vector<std::uint64_t> shingles;

    std::size_t size() const { return shingles.size(); }
    bool empty() const { return shingles.empty(); }
    bool contains(std::uint64_t code) const {
        return std::binary_search(shingles.begin(), shingles.end(), code);
    }
    bool operator==(const ShingleSet&) const = default;
};

inline std::uint64_t encode_shingle(ByteView bytes) {
    if (bytes.size() <= 8) {
        std::uint64_t code = 0;
        for (auto b : bytes) code = (code << 8) | b;
        return code;
    }
    return hash::mix64(hash::fnv1a(bytes));
}

inline std::uint64_t encode_shingle(std::string_view s) { return encode_shingle(as_bytes(s)); }

inline ShingleSet to_shingle_set(ByteView source, std::size_t k, std::string_view id = {}) {
    if (k == 0) throw ConfigError("shingle length k must be >= 1");
    ShingleSet set{k, {}};
    if (source.size() < k) {
        warn("test '" + std::string(id) + "' is shorter than k=" + std::to_string(k) +
             " bytes; its shingle set is empty");
        return set;
    }
    const std::size_t count = source.size() - k + 1;
    set.shingles.reserve(count);
    if (k <= 8) {
        // rolling pack
        const std::uint64_t mask = k == 8 ? ~0ULL : ((1ULL << (8 * k)) - 1);
        std::uint64_t code = 0;
        for (std::size_t i = 0; i < k - 1; ++i) code = (code << 8) | source[i];
        for (std::size_t i = k - 1; i < source.size(); ++i) {
            code = ((code << 8) | source[i]) & mask;
            set.shingles.push_back(code);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) set.shingles.push_back(encode_shingle(source.subspan(i, k)));
    }
    std::sort(set.shingles.begin(), set.shingles.end());
    set.shingles.erase(std::unique(set.shingles.begin(), set.shingles.end()), set.shingles.end());
    return set;
}

inline ShingleSet to_shingle_set(const TestCase& tc, std::size_t k) { return to_shingle_set(tc.bytes(), k, tc.id); }

// ---------------------------------------------------------------------------
// Fault matrix

/// Ground truth: fault -> tests that detect it. Test references are suite
/// indices; every fault has at least one detecting test.
struct FaultMatrix {
    std::vector<std::string> faults;
    std::vector<std::vector<std::size_t>> detects;  // parallel to faults, sorted
    std::vector<std::string> test_ids;              // suite ids, manifest order

    std::size_t m() const { return faults.size(); }
    std::size_t n() const { return test_ids.size(); }
};

namespace detail {
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += '"';
    return out;
}
}  // namespace detail

/// Parses `fault_id,test_id` CSV text. A row with an empty test_id declares a
/// fault without a detecting test, which is rejected like any other fault
/// that ends up undetected.
inline FaultMatrix parse_fault_matrix(std::string_view text, const TestSuite& suite) {
    FaultMatrix fm;
    fm.test_ids = suite.ids();
    std::unordered_map<std::string, std::size_t> fault_index;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);  // BOM
            auto header = detail::split_csv_line(line);
            if (header.size() != 2 || header[0] != "fault_id" || header[1] != "test_id") {
                throw CorpusError(CorpusError::Kind::malformed_row, std::to_string(line_no),
                                  "fault matrix header must be 'fault_id,test_id'");
            }
            header_seen = true;
            continue;
        }
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 2 || fields[0].empty()) {
            throw CorpusError(CorpusError::Kind::malformed_row, std::to_string(line_no),
                              "malformed fault matrix row " + std::to_string(line_no) + ": '" +
                                  std::string(line) + "'");
        }
        auto [it, inserted] = fault_index.emplace(fields[0], fm.faults.size());
        if (inserted) {
            fm.faults.push_back(fields[0]);
            fm.detects.emplace_back();
        }
        if (fields[1].empty()) continue;
        auto idx = suite.index_of(fields[1]);
        if (!idx) {
            throw CorpusError(CorpusError::Kind::unknown_test, fields[1],
                              "fault '" + fields[0] + "' references unknown test id '" + fields[1] + "' (row " +
                                  std::to_string(line_no) + ")");
        }
        fm.detects[it->second].push_back(*idx);
    }
    if (!header_seen) {
        throw CorpusError(CorpusError::Kind::malformed_row, "1", "fault matrix is empty (missing header)");
    }
    for (std::size_t f = 0; f < fm.faults.size(); ++f) {
        auto& d = fm.detects[f];
        if (d.empty()) {
            throw CorpusError(CorpusError::Kind::undetected_fault, fm.faults[f],
                              "fault '" + fm.faults[f] + "' is not detected by any test");
        }
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
    }
    return fm;
}

inline FaultMatrix load_fault_matrix(const std::filesystem::path& path, const TestSuite& suite) {
    if (!std::filesystem::exists(path)) {
        throw CorpusError(CorpusError::Kind::missing_file, path.string(),
                          "fault matrix not found: '" + path.string() + "'");
    }
    auto raw = read_file_bytes(path);
    return parse_fault_matrix(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()), suite);
}

inline std::string format_fault_matrix(const FaultMatrix& fm) {
    std::string out = "fault_id,test_id\n";
    for (std::size_t f = 0; f < fm.m(); ++f) {
        for (auto t : fm.detects[f]) {
            out += detail::csv_escape(fm.faults[f]);
            out += ',';
            out += detail::csv_escape(fm.test_ids[t]);
            out += '\n';
        }
    }
    return out;
}

inline void save_fault_matrix(const FaultMatrix& fm, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << format_fault_matrix(fm);
}

}  // namespace divprio
