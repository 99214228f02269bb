#pragma once

// Experiment harness: run techniques over suite versions and seeds, score
// each round with APFD, and compare techniques with Mann-Whitney U, VDA and
// BCa intervals.

#include <divprio/apfd.hpp>
#include <divprio/matrix_io.hpp>
#include <divprio/prioritizer.hpp>
#include <divprio/stats.hpp>

#include <map>

namespace divprio {

struct SuiteVersion {
    std::string suite;
    std::string version;
    TestSuite tests;
    FaultMatrix faults;
};

struct RoundResult {
    std::string suite;
    std::string version;
    std::string technique;
    std::uint64_t seed = 0;
    double apfd = 0.0;
    double prep_seconds = 0.0;
    double algo_seconds = 0.0;
};

struct TechniqueSummary {
    std::string group;
    std::string technique;
    std::size_t rounds = 0;
    double mean_apfd = 0.0;
    stats::Interval apfd_ci;
    double mean_amet = 0.0;
    stats::Interval amet_ci;
};

struct ComparisonReport {
    std::string group;
    std::string x;
    std::string y;
    double p_value = 1.0;
    double vda = 0.5;
    bool significant = false;
    std::string magnitude;
    double mean_x = 0.0;
    stats::Interval ci_x;
    double mean_y = 0.0;
    stats::Interval ci_y;
};

inline constexpr double significance_level = 0.05;

enum class CiGrouping { pooled, per_suite };

struct ExperimentOptions {
    TechniqueOptions technique;  // seed is overridden per round
    std::size_t replicates = 1000;
    double level = 0.95;
    std::uint64_t ci_seed = 2024;
    CiGrouping grouping = CiGrouping::pooled;
};

struct ExperimentResult {
    std::vector<RoundResult> rounds;
    std::vector<TechniqueSummary> summaries;
    std::vector<ComparisonReport> comparisons;
};

/// Seed for one random round, derived from the user seed and the version so
/// equal-sized versions are not shuffled identically.
inline std::uint64_t round_seed(std::uint64_t seed, const SuiteVersion& v) {
    return hash::combine(seed, hash::fnv1a(as_bytes(v.suite + "/" + v.version)));
}

inline ComparisonReport compare_samples(std::string group, std::string x_name, std::span<const double> x,
                                        std::string y_name, std::span<const double> y, const ExperimentOptions& opts) {
    ComparisonReport r;
    r.group = std::move(group);
    r.x = std::move(x_name);
    r.y = std::move(y_name);
    r.p_value = stats::mann_whitney_u(x, y);
    r.vda = stats::vda(x, y);
    r.significant = r.p_value < significance_level;
    r.magnitude = stats::vda_magnitude(r.vda);
    auto ci = [&](std::span<const double> s, const std::string& name) {
        if (s.size() < 2) return stats::Interval{s[0], s[0]};
        return stats::bootstrap_ci_mean(s, opts.replicates, opts.level,
                                        hash::combine(opts.ci_seed, hash::fnv1a(as_bytes(name))));
    };
    r.mean_x = stats::mean(x);
    r.ci_x = ci(x, r.x);
    r.mean_y = stats::mean(y);
    r.ci_y = ci(y, r.y);
    return r;
}

/// One round per (version, seed, technique). Comparisons cover every
/// technique pair in roster order, with RND always on the right.
inline ExperimentResult run_experiment(std::span<const SuiteVersion> versions, std::span<const Technique> techniques,
                                       std::span<const std::uint64_t> seeds, const ExperimentOptions& opts) {
    if (versions.empty()) throw ConfigError("run_experiment: need at least one suite/fault-matrix pair");
    if (techniques.empty()) throw ConfigError("run_experiment: need at least one technique");
    if (seeds.empty()) throw ConfigError("run_experiment: need at least one seed");

    ExperimentResult res;
    for (const auto& v : versions) {
        for (auto seed : seeds) {
            const auto rs = round_seed(seed, v);
            for (auto t : techniques) {
                auto topts = opts.technique;
                topts.seed = rs;
                auto order = prioritize(v.tests, t, topts);
                auto score = apfd(order.order, v.faults);
                res.rounds.push_back({v.suite, v.version, acronym(t), rs, score.apfd, order.prep_seconds,
                                      order.algo_seconds});
            }
        }
    }

    // group -> technique -> samples
    std::map<std::string, std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>> samples;
    std::vector<std::string> groups;
    for (const auto& r : res.rounds) {
        const auto group = opts.grouping == CiGrouping::pooled ? std::string("all") : r.suite;
        if (!samples.count(group)) groups.push_back(group);
        auto& [apfds, amets] = samples[group][r.technique];
        apfds.push_back(r.apfd);
        amets.push_back(r.prep_seconds + r.algo_seconds);
    }

    for (const auto& group : groups) {
        auto& by_tech = samples[group];
        for (auto t : techniques) {
            const auto name = acronym(t);
            const auto& [apfds, amets] = by_tech[name];
            TechniqueSummary s;
            s.group = group;
            s.technique = name;
            s.rounds = apfds.size();
            s.mean_apfd = stats::mean(apfds);
            s.mean_amet = stats::mean(amets);
            const auto seed = hash::combine(opts.ci_seed, hash::fnv1a(as_bytes(name)));
            if (apfds.size() >= 2) {
                s.apfd_ci = stats::bootstrap_ci_mean(apfds, opts.replicates, opts.level, seed);
                s.amet_ci = stats::bootstrap_ci_mean(amets, opts.replicates, opts.level, seed);
            } else {
                s.apfd_ci = {s.mean_apfd, s.mean_apfd};
                s.amet_ci = {s.mean_amet, s.mean_amet};
            }
            res.summaries.push_back(s);
        }
        for (std::size_t i = 0; i < techniques.size(); ++i) {
            for (std::size_t j = i + 1; j < techniques.size(); ++j) {
                auto a = techniques[i];
                auto b = techniques[j];
                if (a == Technique::rnd) std::swap(a, b);
                const auto& xa = by_tech[acronym(a)].first;
                const auto& xb = by_tech[acronym(b)].first;
                res.comparisons.push_back(compare_samples(group, acronym(a), xa, acronym(b), xb, opts));
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Report encodings

namespace report {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string rounds_csv(const ExperimentResult& r, bool with_timings = true) {
    std::string out = "suite,version,technique,seed,apfd,prep_seconds,algo_seconds\n";
    for (const auto& x : r.rounds) {
        out += detail::csv_escape(x.suite) + ',' + detail::csv_escape(x.version) + ',' + x.technique + ',' +
               std::to_string(x.seed) + ',' + format_double(x.apfd) + ',';
        out += with_timings ? format_double(x.prep_seconds) + ',' + format_double(x.algo_seconds) : std::string("NA,NA");
        out += '\n';
    }
    return out;
}

/// VDA of each technique against RND (rows only exist when RND ran).
inline std::string vda_csv(const ExperimentResult& r) {
    std::string out = "group,technique,vda_vs_rnd,p_value,significant,magnitude\n";
    for (const auto& c : r.comparisons) {
        if (c.y != "RND") continue;
        out += detail::csv_escape(c.group) + ',' + c.x + ',' + fixed(c.vda, 4) + ',' + format_double(c.p_value) + ',' +
               (c.significant ? "true" : "false") + ',' + c.magnitude + '\n';
    }
    return out;
}

inline std::string apfd_csv(const ExperimentResult& r) {
    std::string out = "group,technique,rounds,mean_apfd,ci_lower,ci_upper\n";
    for (const auto& s : r.summaries) {
        out += detail::csv_escape(s.group) + ',' + s.technique + ',' + std::to_string(s.rounds) + ',' +
               fixed(s.mean_apfd, 4) + ',' + fixed(s.apfd_ci.lower, 4) + ',' + fixed(s.apfd_ci.upper, 4) + '\n';
    }
    return out;
}

inline std::string amet_csv(const ExperimentResult& r, bool with_timings = true) {
    std::string out = "group,technique,rounds,mean_amet,ci_lower,ci_upper\n";
    for (const auto& s : r.summaries) {
        out += detail::csv_escape(s.group) + ',' + s.technique + ',' + std::to_string(s.rounds) + ',';
        out += with_timings ? format_double(s.mean_amet) + ',' + format_double(s.amet_ci.lower) + ',' +
                                  format_double(s.amet_ci.upper)
                            : std::string("NA,NA,NA");
        out += '\n';
    }
    return out;
}

inline std::string comparisons_csv(const ExperimentResult& r) {
    std::string out = "group,x,y,vda,p_value,significant,magnitude,mean_x,mean_y\n";
    for (const auto& c : r.comparisons) {
        out += detail::csv_escape(c.group) + ',' + c.x + ',' + c.y + ',' + fixed(c.vda, 4) + ',' +
               format_double(c.p_value) + ',' + (c.significant ? "true" : "false") + ',' + c.magnitude + ',' +
               fixed(c.mean_x, 4) + ',' + fixed(c.mean_y, 4) + '\n';
    }
    return out;
}

inline nlohmann::json to_json(const ExperimentResult& r, bool with_timings = true) {
    nlohmann::json j;
    j["comparisons"] = nlohmann::json::array();
    for (const auto& c : r.comparisons) {
        j["comparisons"].push_back({{"group", c.group},
                                    {"x", c.x},
                                    {"y", c.y},
                                    {"p_value", c.p_value},
                                    {"vda", c.vda},
                                    {"significant", c.significant},
                                    {"magnitude", c.magnitude},
                                    {"mean_x", c.mean_x},
                                    {"ci_x", {c.ci_x.lower, c.ci_x.upper}},
                                    {"mean_y", c.mean_y},
                                    {"ci_y", {c.ci_y.lower, c.ci_y.upper}}});
    }
    j["summaries"] = nlohmann::json::array();
    for (const auto& s : r.summaries) {
        nlohmann::json e = {{"group", s.group},
                            {"technique", s.technique},
                            {"rounds", s.rounds},
                            {"mean_apfd", s.mean_apfd},
                            {"apfd_ci", {s.apfd_ci.lower, s.apfd_ci.upper}}};
        if (with_timings) {
            e["mean_amet"] = s.mean_amet;
            e["amet_ci"] = {s.amet_ci.lower, s.amet_ci.upper};
        }
        j["summaries"].push_back(std::move(e));
    }
    return j;
}

}  // namespace report
}  // namespace divprio
