#pragma once

// Seeded generator of clustered test corpora with planted faults. Every
// cluster derives from one base source; each member rewrites a fixed share of
// the base's body lines in place (same length), so two members of a cluster
// agree byte-for-byte on at least 1 - 2 * mutation of their text. Each
// cluster's members, and only they, detect the cluster's fault.

#include <divprio/corpus.hpp>

#include <cstdio>

namespace divprio::synthetic {

struct Config {
    std::size_t tests = 200;
    std::size_t clusters = 10;
    std::size_t target_bytes = 1500;  // approximate source length per test
    double mutation = 0.2;            // share of body lines rewritten per member
    std::uint64_t seed = 1;
    bool shuffle = true;  // shuffle manifest order; otherwise cluster-major
};

struct Corpus {
    TestSuite suite;
    FaultMatrix faults;
    std::vector<std::size_t> cluster_of;  // per manifest index
};

namespace detail {

class Writer {
public:
    explicit Writer(std::uint64_t seed) : rng_(seed) {}

    std::size_t below(std::size_t bound) { return static_cast<std::size_t>(bounded_uniform(rng_, bound)); }

    std::string identifier() {
        static constexpr char letters[] = "abcdefghijklmnopqrstuvwxyz";
        std::string s;
        const auto len = 3 + below(8);
        for (std::size_t i = 0; i < len; ++i) s.push_back(letters[below(26)]);
        if (below(2)) s[0] = static_cast<char>(s[0] - 'a' + 'A');
        return s;
    }

    std::string number() { return std::to_string(below(100000)); }

    std::string statement() {
        switch (below(6)) {
            case 0: return "    assertEquals(" + number() + ", " + identifier() + "." + identifier() + "());";
            case 1: return "    " + identifier() + " " + identifier() + " = new " + identifier() + "(" + number() + ");";
            case 2: return "    assertTrue(" + identifier() + ".is" + identifier() + "(\"" + identifier() + "\"));";
            case 3: return "    " + identifier() + "." + identifier() + "(" + identifier() + ", " + number() + ");";
            case 4: return "    assertNotNull(" + identifier() + "(" + identifier() + "));";
            default: return "    int " + identifier() + " = " + identifier() + " * " + number() + ";";
        }
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Fits `line` to exactly `width` bytes by padding with spaces or truncating.
inline std::string fit(std::string line, std::size_t width) {
    line.resize(width, ' ');
    return line;
}

}  // namespace detail

inline Corpus generate(const Config& cfg) {
    if (cfg.tests == 0 || cfg.clusters == 0 || cfg.clusters > cfg.tests) {
        throw ConfigError("synthetic: need 1 <= clusters <= tests");
    }
    if (!(cfg.mutation >= 0.0 && cfg.mutation <= 1.0)) throw ConfigError("synthetic: mutation must be in [0, 1]");
    detail::Writer w(cfg.seed);

    const std::string header = "package org.example.generated;\n\nimport org.junit.Test;\nimport static org.junit.Assert.*;\n\n";

    // cluster bases: class line, body lines, closing brace
    std::vector<std::vector<std::string>> bases(cfg.clusters);
    for (std::size_t c = 0; c < cfg.clusters; ++c) {
        auto& lines = bases[c];
        lines.push_back("public class " + w.identifier() + "Test {");
        lines.push_back("  @Test public void " + w.identifier() + "() {");
        std::size_t bytes = header.size() + lines[0].size() + lines[1].size() + 8;
        while (bytes < cfg.target_bytes) {
            lines.push_back(w.statement());
            bytes += lines.back().size() + 1;
        }
        lines.push_back("  }");
        lines.push_back("}");
    }

    std::vector<std::size_t> cluster_of(cfg.tests);
    for (std::size_t i = 0; i < cfg.tests; ++i) cluster_of[i] = i % cfg.clusters;
    std::sort(cluster_of.begin(), cluster_of.end());
    if (cfg.shuffle) {
        for (std::size_t i = cfg.tests; i > 1; --i) std::swap(cluster_of[i - 1], cluster_of[w.below(i)]);
    }

    std::vector<TestCase> cases;
    cases.reserve(cfg.tests);
    const int width = static_cast<int>(std::to_string(cfg.tests).size());
    for (std::size_t i = 0; i < cfg.tests; ++i) {
        auto lines = bases[cluster_of[i]];
        // body lines are [2, size - 2)
        const std::size_t body = lines.size() - 4;
        const auto rewrites = static_cast<std::size_t>(cfg.mutation * static_cast<double>(body));
        std::vector<std::size_t> slots(body);
        std::iota(slots.begin(), slots.end(), std::size_t{2});
        for (std::size_t r = 0; r < rewrites; ++r) {
            std::swap(slots[r], slots[r + w.below(body - r)]);
            auto& line = lines[slots[r]];
            line = detail::fit(w.statement(), line.size());
        }
        std::string text = header;
        for (const auto& l : lines) {
            text += l;
            text += '\n';
        }
        char id[32];
        std::snprintf(id, sizeof id, "T%0*zu", width, i);
        cases.push_back({id, to_bytes(text)});
    }

    Corpus out;
    out.suite = TestSuite(std::move(cases), "synthetic");
    out.cluster_of = cluster_of;
    out.faults.test_ids = out.suite.ids();
    out.faults.detects.resize(cfg.clusters);
    for (std::size_t c = 0; c < cfg.clusters; ++c) {
        char fid[32];
        std::snprintf(fid, sizeof fid, "F%zu", c);
        out.faults.faults.emplace_back(fid);
    }
    for (std::size_t i = 0; i < cfg.tests; ++i) out.faults.detects[cluster_of[i]].push_back(i);
    return out;
}

}  // namespace divprio::synthetic
