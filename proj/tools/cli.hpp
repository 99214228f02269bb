#pragma once

// divprio command-line front end. run() is the whole program minus main so
// tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage error, 2 input error, 3 internal error.

#include <divprio/divprio.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace divprio::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_input = 2;
inline constexpr int exit_internal = 3;

inline constexpr const char* version = "0.1.0";

/// Usage problems detected after CLI11 has parsed the flags.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string valid_acronyms() {
    std::string s;
    for (auto t : all_techniques) {
        if (!s.empty()) s += ", ";
        s += acronym(t);
    }
    return s;
}

inline Technique technique_or_usage(const std::string& name) {
    auto t = parse_technique(name);
    if (!t) throw UsageError("unknown technique '" + name + "' (valid: " + valid_acronyms() + ")");
    return *t;
}

inline std::vector<Technique> techniques_or_usage(const std::vector<std::string>& names) {
    std::vector<Technique> out;
    for (const auto& n : names) {
        std::string lower = n;
        for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (lower == "all") {
            for (auto t : all_techniques) {
                if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
            }
            continue;
        }
        auto t = technique_or_usage(n);
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    return out;
}

inline std::uint64_t parse_u64(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + " '" + s + "'");
    }
}

/// "1,2,5" or "1..30" (inclusive), or a mix.
inline std::vector<std::uint64_t> parse_seed_list(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> out;
    for (const auto& item : items) {
        auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_u64(item, "seed"));
            continue;
        }
        auto lo = parse_u64(item.substr(0, dots), "seed");
        auto hi = parse_u64(item.substr(dots + 2), "seed");
        if (hi < lo || hi - lo > 1000000) throw UsageError("invalid seed range '" + item + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    return out;
}

inline std::optional<std::uint64_t> env_seed() {
    if (const char* env = std::getenv("DIVPRIO_SEED"); env && *env) return parse_u64(env, "DIVPRIO_SEED");
    return std::nullopt;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    auto raw = read_file_bytes(path);
    return {raw.begin(), raw.end()};
}

/// Config echo: the resolved argument vector plus a readable summary.
inline void write_echo(const std::filesystem::path& path, const std::vector<std::string>& argv,
                       nlohmann::json summary) {
    nlohmann::json j;
    j["tool"] = "divprio";
    j["version"] = version;
    j["argv"] = argv;
    j["config"] = std::move(summary);
    write_text(path, j.dump(2) + "\n");
}

struct SharedFlags {
    std::string manifest;
    std::string out;
    std::string format = "json";
    std::size_t shingle_k = 5;
    std::string compressor = "lz4";
    std::size_t lsh_perms = 10;
    std::size_t lsh_bands = 10;
    std::size_t lsh_rows = 1;
    std::uint64_t lsh_seed = LshConfig{}.seed;
    std::size_t jobs = default_jobs();
    std::string cache_dir;
    bool no_timings = false;
    bool lowercase = false;
    bool collapse_ws = false;
    std::string echo;

    void add_technique_flags(CLI::App* cmd) {
        cmd->add_option("--shingle-k", shingle_k, "Shingle length in bytes")->check(CLI::PositiveNumber);
        cmd->add_option("--compressor", compressor, "Compressor for NCD techniques");
        cmd->add_option("--lsh-perms", lsh_perms, "MinHash permutations P");
        cmd->add_option("--lsh-bands", lsh_bands, "LSH bands b");
        cmd->add_option("--lsh-rows", lsh_rows, "LSH rows per band r");
        cmd->add_option("--lsh-seed", lsh_seed, "Seed of the MinHash hash family");
        cmd->add_option("--jobs", jobs, "Worker threads (output never depends on it)")->check(CLI::PositiveNumber);
        cmd->add_option("--cache-dir", cache_dir, "Directory for cached distance matrices");
        cmd->add_flag("--no-timings", no_timings, "Leave wall-clock fields out of outputs");
        cmd->add_flag("--lowercase", lowercase, "Lowercase ASCII letters in test sources");
        cmd->add_flag("--collapse-whitespace", collapse_ws, "Collapse whitespace runs in test sources");
    }

    Preprocessing preprocessing() const { return {collapse_ws, lowercase}; }

    TechniqueOptions technique_options() const {
        TechniqueOptions o;
        o.shingle_k = shingle_k;
        o.compressor = compressor;
        o.lsh = {lsh_perms, lsh_bands, lsh_rows, lsh_seed};
        o.jobs = jobs;
        if (!cache_dir.empty()) o.cache_dir = cache_dir;
        return o;
    }

    void validate() const {
        try {
            LshConfig{lsh_perms, lsh_bands, lsh_rows, lsh_seed}.validate();
            make_compressor(compressor);
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }
};

inline nlohmann::json technique_summary(const SharedFlags& f) {
    return {{"shingle_k", f.shingle_k},
            {"compressor", f.compressor},
            {"lsh", {{"permutations", f.lsh_perms}, {"bands", f.lsh_bands}, {"rows", f.lsh_rows}, {"seed", f.lsh_seed}}},
            {"jobs", f.jobs},
            {"preprocessing", {{"lowercase", f.lowercase}, {"collapse_whitespace", f.collapse_ws}}},
            {"timings", !f.no_timings}};
}

inline std::string order_csv(const PrioritizedOrder& o) {
    std::string out = "position,id,score\n";
    for (std::size_t i = 0; i < o.order.size(); ++i) {
        out += std::to_string(i + 1) + ',' + divprio::detail::csv_escape(o.order[i]) + ',' + format_double(o.scores[i]) + '\n';
    }
    return out;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Similarity-based test case prioritization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    detail::SharedFlags f;

    // prioritize
    auto* prio = app.add_subcommand("prioritize", "Order a test suite");
    std::string technique_name;
    std::optional<std::uint64_t> seed_flag;
    prio->add_option("-t,--technique", technique_name, "RND, MNH, JAC, NCD, NCD-MS, LSH or SC")->required();
    prio->add_option("--manifest", f.manifest, "Suite manifest (JSON)")->required();
    prio->add_option("--out", f.out, "Output file (default: stdout)");
    prio->add_option("--format", f.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    prio->add_option("--seed", seed_flag, "Seed for RND (fallback: $DIVPRIO_SEED, then 0)");
    prio->add_option("--config-echo", f.echo, "Where to write the config echo (default: <out>.config.json)");
    f.add_technique_flags(prio);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score an order file with APFD");
    std::string order_path;
    std::string faults_path;
    std::string eval_format = "text";
    std::string eval_manifest;
    std::string eval_out;
    eval->add_option("--order", order_path, "Order file (JSON or one id per line)")->required();
    eval->add_option("--manifest", eval_manifest, "Suite manifest (JSON)")->required();
    eval->add_option("--faults", faults_path, "Fault matrix CSV")->required();
    eval->add_option("--format", eval_format, "text, json or csv")->check(CLI::IsMember({"json", "csv", "text"}));
    eval->add_option("--out", eval_out, "Output file (default: stdout)");

    // compare
    auto* cmp = app.add_subcommand("compare", "Run techniques over suites and seeds and compare them");
    std::vector<std::string> manifests;
    std::vector<std::string> fault_files;
    std::vector<std::string> technique_names;
    std::vector<std::string> seed_items;
    std::string out_dir;
    std::string grouping = "pooled";
    std::size_t replicates = 1000;
    std::uint64_t ci_seed = 2024;
    cmp->add_option("--manifest", manifests, "Suite manifests (repeatable, paired with --faults)")->required();
    cmp->add_option("--faults", fault_files, "Fault matrices, one per manifest")->required();
    cmp->add_option("-t,--techniques", technique_names, "Techniques or 'all'")->delimiter(',')->required();
    cmp->add_option("--seeds", seed_items, "Seeds: list '1,2,3' or range '1..30'")->delimiter(',');
    cmp->add_option("--out-dir", out_dir, "Directory for tables and report")->required();
    cmp->add_option("--ci-group", grouping, "pooled or per-suite")->check(CLI::IsMember({"pooled", "per-suite"}));
    cmp->add_option("--replicates", replicates, "Bootstrap replicates")->check(CLI::Range(2, 1000000));
    cmp->add_option("--ci-seed", ci_seed, "Seed for bootstrap resampling");
    f.add_technique_flags(cmp);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic clustered corpus with planted faults");
    synthetic::Config gcfg;
    std::string gen_dir;
    gen->add_option("--out-dir", gen_dir, "Target directory")->required();
    gen->add_option("--tests", gcfg.tests, "Number of tests")->check(CLI::PositiveNumber);
    gen->add_option("--clusters", gcfg.clusters, "Number of fault clusters")->check(CLI::PositiveNumber);
    gen->add_option("--bytes", gcfg.target_bytes, "Approximate bytes per test");
    gen->add_option("--mutation", gcfg.mutation, "Share of lines rewritten per member")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gcfg.seed, "Generator seed");

    // replay
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a config echo");
    std::string echo_path;
    replay->add_option("echo", echo_path, "Config echo JSON")->required();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (*prio) err << prio->help();
        return exit_usage;
    }

    try {
        if (*prio) {
            const auto technique = detail::technique_or_usage(technique_name);
            f.validate();
            std::vector<std::string> echo_args = args;
            std::uint64_t seed = 0;
            if (seed_flag) seed = *seed_flag;
            else if (auto env = detail::env_seed()) {
                seed = *env;
                echo_args.push_back("--seed");
                echo_args.push_back(std::to_string(seed));
            }
            auto suite = load_suite(f.manifest, f.preprocessing());
            auto opts = f.technique_options();
            opts.seed = seed;
            auto order = prioritize(suite, technique, opts);
            std::string text;
            if (f.format == "json") text = format_order(order, OrderFormat::json, !f.no_timings);
            else if (f.format == "text") text = format_order(order, OrderFormat::text);
            else text = detail::order_csv(order);
            if (f.out.empty()) {
                out << text;
            } else {
                detail::write_text(f.out, text);
            }
            std::string echo = f.echo;
            if (echo.empty() && !f.out.empty()) echo = f.out + ".config.json";
            if (!echo.empty()) {
                auto summary = detail::technique_summary(f);
                summary["subcommand"] = "prioritize";
                summary["technique"] = acronym(technique);
                summary["manifest"] = f.manifest;
                summary["seed"] = seed;
                summary["format"] = f.format;
                detail::write_echo(echo, echo_args, std::move(summary));
            }
            return exit_ok;
        }

        if (*eval) {
            auto suite = load_suite(eval_manifest);
            auto faults = load_fault_matrix(faults_path, suite);
            auto ids = load_order_ids(order_path);
            auto r = apfd(ids, faults, order_path);
            std::string text;
            if (eval_format == "json") {
                nlohmann::json j = {{"order", r.order_id}, {"apfd", r.apfd}, {"n", r.n}, {"m", r.m}, {"tf", r.tf}};
                text = j.dump(2) + "\n";
            } else if (eval_format == "csv") {
                text = "order,apfd,n,m\n" + divprio::detail::csv_escape(r.order_id) + ',' + format_double(r.apfd) +
                       ',' + std::to_string(r.n) + ',' + std::to_string(r.m) + '\n';
            } else {
                text = "APFD " + report::fixed(r.apfd, 2) + " (n=" + std::to_string(r.n) + ", m=" +
                       std::to_string(r.m) + ")\n";
            }
            if (eval_out.empty()) out << text;
            else detail::write_text(eval_out, text);
            return exit_ok;
        }

        if (*cmp) {
            auto techniques = detail::techniques_or_usage(technique_names);
            if (techniques.size() < 2) throw UsageError("compare needs at least two techniques");
            if (manifests.size() != fault_files.size()) {
                throw UsageError("--manifest and --faults must be given the same number of times");
            }
            f.validate();
            std::vector<std::string> echo_args = args;
            std::vector<std::uint64_t> seeds;
            if (!seed_items.empty()) {
                seeds = detail::parse_seed_list(seed_items);
            } else if (auto env = detail::env_seed()) {
                seeds = {*env};
                echo_args.push_back("--seeds");
                echo_args.push_back(std::to_string(*env));
            } else {
                seeds = {1};
            }

            std::vector<SuiteVersion> versions;
            for (std::size_t i = 0; i < manifests.size(); ++i) {
                std::filesystem::path mp = manifests[i];
                SuiteVersion v;
                v.tests = load_suite(mp, f.preprocessing());
                v.faults = load_fault_matrix(fault_files[i], v.tests);
                v.suite = v.tests.name().empty() ? std::string("suite") : v.tests.name();
                v.version = mp.stem().string();
                versions.push_back(std::move(v));
            }
            ExperimentOptions eopts;
            eopts.technique = f.technique_options();
            eopts.replicates = replicates;
            eopts.ci_seed = ci_seed;
            eopts.grouping = grouping == "pooled" ? CiGrouping::pooled : CiGrouping::per_suite;
            auto result = run_experiment(versions, techniques, seeds, eopts);

            const std::filesystem::path dir = out_dir;
            const bool timings = !f.no_timings;
            detail::write_text(dir / "rounds.csv", report::rounds_csv(result, timings));
            detail::write_text(dir / "vda.csv", report::vda_csv(result));
            detail::write_text(dir / "apfd.csv", report::apfd_csv(result));
            detail::write_text(dir / "amet.csv", report::amet_csv(result, timings));
            detail::write_text(dir / "comparisons.csv", report::comparisons_csv(result));
            detail::write_text(dir / "report.json", report::to_json(result, timings).dump(2) + "\n");

            auto summary = detail::technique_summary(f);
            summary["subcommand"] = "compare";
            nlohmann::json names = nlohmann::json::array();
            for (auto t : techniques) names.push_back(acronym(t));
            summary["techniques"] = names;
            summary["seeds"] = seeds;
            summary["manifests"] = manifests;
            summary["faults"] = fault_files;
            summary["ci_group"] = grouping;
            summary["replicates"] = replicates;
            summary["ci_seed"] = ci_seed;
            detail::write_echo(dir / "config.json", echo_args, std::move(summary));
            out << report::vda_csv(result) << report::apfd_csv(result);
            return exit_ok;
        }

        if (*gen) {
            auto corpus = synthetic::generate(gcfg);
            const std::filesystem::path dir = gen_dir;
            std::filesystem::create_directories(dir);
            save_suite(corpus.suite, dir / "manifest.json", "tests", ".java");
            save_fault_matrix(corpus.faults, dir / "faults.csv");
            out << "wrote " << corpus.suite.size() << " tests and " << corpus.faults.m() << " faults to "
                << dir.string() << '\n';
            return exit_ok;
        }

        if (*replay) {
            auto j = nlohmann::json::parse(detail::read_text(echo_path));
            if (!j.contains("argv") || !j["argv"].is_array()) throw InputError("config echo has no 'argv' array");
            auto argv = j["argv"].get<std::vector<std::string>>();
            if (!argv.empty() && argv.front() == "replay") throw InputError("config echo cannot replay itself");
            return run(argv, out, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_usage;
}

}  // namespace divprio::cli
