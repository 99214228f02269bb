// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails. Usage: acceptance --cli <path-to-divprio> [--only N]

#include "oracles.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace divprio;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string cli_path;

// 1 -------------------------------------------------------------------------

Outcome greedy_oracle() {
    testutil::QuietWarnings quiet;
    std::mt19937_64 rng(1001);
    const auto start = Clock::now();
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 8;
        std::vector<std::pair<std::string, std::string>> cases;
        for (std::size_t i = 0; i < n; ++i) {
            cases.emplace_back("t" + std::to_string(i), testutil::random_text(rng, 4 + rng() % 120, 5));
        }
        auto suite = testutil::make_suite(cases);
        DistanceMatrix m;
        switch (trial % 4) {
            case 0: m = build_distance_matrix(suite, {Metric::manhattan}); break;
            case 1: m = build_distance_matrix(suite, {Metric::jaccard}); break;
            case 2: m = build_distance_matrix(suite, {Metric::ncd}); break;
            default: {
                // arbitrary symmetric matrix with frequent ties
                m = DistanceMatrix("random", suite.ids());
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, static_cast<double>(rng() % 5));
                }
            }
        }
        mismatches += prioritize_pairwise(suite, m).indices != oracle::pairwise_order(m, true);
        mismatches += prioritize_pairwise(suite, m, PairwiseMode::minimize).indices != oracle::pairwise_order(m, false);
    }
    const double secs = seconds_since(start);
    return {mismatches == 0 && secs < 10.0,
            std::to_string(mismatches) + " mismatches over 200 suites, " + fmt("%.2f s (limit 10 s)", secs)};
}

// 2 -------------------------------------------------------------------------

Outcome apfd_oracle() {
    std::mt19937_64 rng(1002);
    const auto start = Clock::now();
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        const std::size_t m = 1 + rng() % 10;
        FaultMatrix fm;
        for (std::size_t i = 0; i < n; ++i) fm.test_ids.push_back("T" + std::to_string(i));
        std::vector<std::set<std::string>> detecting(m);
        fm.detects.resize(m);
        for (std::size_t f = 0; f < m; ++f) {
            fm.faults.push_back("F" + std::to_string(f));
            for (std::size_t t = 0; t < n; ++t) {
                if (rng() % 4 == 0) fm.detects[f].push_back(t);
            }
            if (fm.detects[f].empty()) fm.detects[f].push_back(rng() % n);
            for (auto t : fm.detects[f]) detecting[f].insert(fm.test_ids[t]);
        }
        auto order = fm.test_ids;
        std::shuffle(order.begin(), order.end(), rng);
        mismatches += apfd(order, fm).apfd != oracle::apfd_walk(order, detecting);
    }
    const double secs = seconds_since(start);
    return {mismatches == 0 && secs < 5.0,
            std::to_string(mismatches) + " mismatches over 500 instances, " + fmt("%.2f s (limit 5 s)", secs)};
}

// 3, 4 ----------------------------------------------------------------------

struct SyntheticRun {
    std::map<std::string, double> vda_vs_rnd;
    double seconds = 0.0;
};

const SyntheticRun& synthetic_run() {
    static const SyntheticRun run = [] {
        testutil::QuietWarnings quiet;
        SyntheticRun r;
        const auto start = Clock::now();
        std::vector<SuiteVersion> versions;
        for (std::uint64_t round = 0; round < 30; ++round) {
            auto c = synthetic::generate({.tests = 200, .clusters = 10, .target_bytes = 1500, .mutation = 0.2,
                                          .seed = 3000 + round});
            versions.push_back({"synthetic", "r" + std::to_string(round), std::move(c.suite), std::move(c.faults)});
        }
        const std::uint64_t seeds[] = {1};
        ExperimentOptions opts;
        opts.technique.jobs = default_jobs();
        auto res = run_experiment(versions, all_techniques, seeds, opts);
        for (const auto& c : res.comparisons) {
            if (c.y == "RND") r.vda_vs_rnd[c.x] = c.vda;
        }
        r.seconds = seconds_since(start);
        return r;
    }();
    return run;
}

Outcome diversity_beats_random() {
    const auto& run = synthetic_run();
    Outcome o;
    std::string detail;
    for (const auto* name : {"NCD", "MNH", "JAC", "NCD-MS", "LSH"}) {
        const double floor = std::string(name) == "LSH" ? 0.60 : 0.70;
        const double v = run.vda_vs_rnd.at(name);
        o.pass = o.pass && v > floor;
        detail += std::string(name) + fmt("=%.3f", v) + (std::string(name) == "LSH" ? "(>0.60) " : "(>0.70) ");
    }
    o.pass = o.pass && run.seconds < 300.0;
    o.detail = detail + fmt("over 30 rounds, %.1f s (limit 300 s)", run.seconds);
    return o;
}

Outcome sanity_check_inverts() {
    const auto& run = synthetic_run();
    const double v = run.vda_vs_rnd.at("SC");
    return {v < 0.35, fmt("SC VDA vs RND = %.3f (< 0.35)", v)};
}

// 5 -------------------------------------------------------------------------

Outcome performance_ordering() {
    testutil::QuietWarnings quiet;
    const auto start = Clock::now();
    auto corpus = synthetic::generate({.tests = 1000, .clusters = 50, .target_bytes = 2048, .seed = 5000});
    std::map<std::string, double> amet;
    TechniqueOptions opts;
    opts.jobs = 1;
    for (auto t : all_techniques) {
        auto o = prioritize(corpus.suite, t, opts);
        amet[acronym(t)] = o.elapsed();
    }
    const double secs = seconds_since(start);
    std::string slowest;
    for (const auto& [name, s] : amet) {
        if (slowest.empty() || s > amet[slowest]) slowest = name;
    }
    const bool lsh_fast = 5.0 * amet["LSH"] <= amet["NCD"];
    const bool mnh_slowest = slowest == "MNH";
    std::string detail = fmt("LSH %.3f s", amet["LSH"]) + fmt(" vs NCD %.3f s", amet["NCD"]) +
                         fmt(" (%.1fx, need >= 5x) ", amet["NCD"] / amet["LSH"]) +
                         (lsh_fast ? "ok" : "NOT MET") + "; slowest=" + slowest + " (need MNH) " +
                         (mnh_slowest ? "ok" : "NOT MET") + "; AMET:";
    for (auto t : all_techniques) detail += " " + acronym(t) + fmt("=%.3f", amet[acronym(t)]);
    detail += fmt("; %.1f s (limit 600 s)", secs);
    return {lsh_fast && mnh_slowest && secs < 600.0, detail};
}

// 6 -------------------------------------------------------------------------

Outcome minhash_quality() {
    std::mt19937_64 rng(1006);
    const LshConfig cfg{512, 512, 1, 0x5eed};
    double total_error = 0.0;
    const int pairs = 200;
    for (int p = 0; p < pairs; ++p) {
        const double target = 0.1 * static_cast<double>(1 + p % 9);
        const std::size_t universe = 400;
        const auto common = static_cast<std::size_t>(std::lround(target * universe));
        std::vector<std::uint64_t> a, b;
        for (std::size_t i = 0; i < universe; ++i) {
            const auto v = rng();
            if (i < common) {
                a.push_back(v);
                b.push_back(v);
            } else if ((i - common) % 2 == 0) {
                a.push_back(v);
            } else {
                b.push_back(v);
            }
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const double exact = static_cast<double>(common) / static_cast<double>(universe);
        const double est = estimate_jaccard(minhash_signature({5, a}, cfg), minhash_signature({5, b}, cfg));
        total_error += std::abs(est - exact);
    }
    const double mae = total_error / pairs;

    int merge_mismatch = 0;
    const LshConfig small{64, 64, 1, 77};
    for (int p = 0; p < 50; ++p) {
        std::vector<std::uint64_t> a(rng() % 300), b(rng() % 300);
        for (auto& v : a) v = rng() % 2000;
        for (auto& v : b) v = rng() % 2000;
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        std::vector<std::uint64_t> u;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
        merge_mismatch += merge_signatures(minhash_signature({5, a}, small), minhash_signature({5, b}, small)) !=
                          minhash_signature({5, u}, small);
    }
    return {mae < 0.05 && merge_mismatch == 0,
            fmt("mean |estimate - exact| = %.4f (< 0.05) at P=512 over 200 pairs; ", mae) +
                std::to_string(merge_mismatch) + " merge/union mismatches over 50 pairs"};
}

// 7 -------------------------------------------------------------------------

Outcome statistics_correctness() {
    using Sample = std::vector<double>;
    std::vector<std::string> failures;
    const double p = stats::mann_whitney_u(Sample{1, 2, 3}, Sample{10, 11, 12});
    if (std::abs(p - 0.1) > 1e-12) failures.push_back(fmt("MW 3v3 p=%.6f", p));
    if (stats::vda(Sample{1, 2, 3}, Sample{1, 2, 3}) != 0.5) failures.push_back("VDA equal");
    if (stats::vda(Sample{5, 6}, Sample{1, 2}) != 1.0) failures.push_back("VDA dominance");
    if (stats::vda(Sample{1, 2}, Sample{1, 3}) != 0.375) failures.push_back("VDA 0.375");
    auto ci = stats::bootstrap_ci_mean(Sample{5, 5, 5, 5});
    if (ci.lower != 5.0 || ci.upper != 5.0) failures.push_back("BCa constant");
    int covered = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        std::mt19937_64 rng(7000 + s);
        std::normal_distribution<double> dist(10.0, 3.0);
        Sample x(200);
        for (auto& v : x) v = dist(rng);
        auto c = stats::bootstrap_ci_mean(x, 1000, 0.95, s);
        covered += c.lower <= 10.0 && 10.0 <= c.upper;
    }
    if (covered < 90) failures.push_back("coverage " + std::to_string(covered));
    std::string detail = fmt("MW 3v3 p=%.4f; VDA cases exact; BCa constant collapses; ", p) + "coverage " +
                         std::to_string(covered) + "/100 (>= 90)";
    if (!failures.empty()) {
        detail += "; failed:";
        for (const auto& f : failures) detail += " " + f;
    }
    return {failures.empty(), detail};
}

// 8 -------------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + cli_path + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

Outcome determinism() {
    if (cli_path.empty()) return {false, "no --cli binary given"};
    testutil::TempDir dir;
    const auto corpus = (dir / "corpus").string();
    if (run_cli("generate --out-dir \"" + corpus + "\" --tests 150 --clusters 6 --bytes 800 --seed 8") != 0) {
        return {false, "generate failed"};
    }
    const auto manifest = corpus + "/manifest.json";
    int differing = 0;
    std::string bad;
    for (auto t : all_techniques) {
        const auto name = acronym(t);
        std::vector<std::string> files;
        for (const auto& variant : {"a1", "b1", "c8"}) {
            const auto out = (dir / (name + "-" + variant + ".json")).string();
            const std::string jobs = variant[1] == '8' ? "8" : "1";
            if (run_cli("prioritize -t " + name + " --manifest \"" + manifest + "\" --seed 12345 --no-timings --jobs " +
                        jobs + " --out \"" + out + "\"") != 0) {
                return {false, name + " run failed"};
            }
            files.push_back(testutil::read_file(out));
        }
        if (files[0] != files[1] || files[0] != files[2] || files[0].empty()) {
            ++differing;
            bad += " " + name;
        }
    }
    return {differing == 0, "7 techniques x (2 runs at --jobs 1, 1 run at --jobs 8): " + std::to_string(differing) +
                                " differing" + bad};
}

// 9 -------------------------------------------------------------------------

// LZ4 self-distance bound for inputs of at least 256 bytes. The worst value
// seen over 60,000 such inputs (random bytes, random letters, generated Java)
// was 0.0432, at the short end; the bound is documented in the README.
constexpr double ncd_self_epsilon = 0.05;

std::string metric_input(std::mt19937_64& rng, std::size_t len) {
    switch (rng() % 3) {
        case 0: return testutil::random_text(rng, len);
        case 1: {
            std::string s = testutil::random_text(rng, len, 26);
            for (auto& c : s) c = static_cast<char>('a' + (static_cast<unsigned char>(c) % 26));
            return s;
        }
        default: {
            auto c = synthetic::generate({.tests = 1, .clusters = 1, .target_bytes = len, .seed = rng()});
            return {c.suite[0].source.begin(), c.suite[0].source.end()};
        }
    }
}

Outcome metric_axioms() {
    testutil::QuietWarnings quiet;
    std::mt19937_64 rng(1009);
    Lz4Compressor lz4;
    int bad_triangle = 0, bad_msym = 0, bad_jrange = 0, bad_jid = 0, bad_nsym = 0, bad_self = 0;
    double worst_self = 0.0;
    for (int i = 0; i < 1000; ++i) {
        NumericVector a(rng() % 64), b(rng() % 64), c(rng() % 64);
        for (auto* v : {&a, &b, &c}) {
            for (auto& x : *v) x = static_cast<std::uint32_t>(rng() % 256);
        }
        const double ab = manhattan(a, b), bc = manhattan(b, c), ac = manhattan(a, c);
        bad_triangle += ac > ab + bc;
        bad_msym += ab != manhattan(b, a);

        auto x = to_shingle_set(as_bytes(testutil::random_text(rng, rng() % 80, 3)), 5);
        auto y = to_shingle_set(as_bytes(testutil::random_text(rng, rng() % 80, 3)), 5);
        const double j = jaccard_distance(x, y);
        bad_jrange += !(j >= 0.0 && j <= 1.0) || j != jaccard_distance(y, x);
        bad_jid += jaccard_distance(x, x) != 0.0;

        const auto p = metric_input(rng, 256 + rng() % 3841);
        const auto q = metric_input(rng, 256 + rng() % 3841);
        bad_nsym += ncd(as_bytes(p), as_bytes(q), lz4) != ncd(as_bytes(q), as_bytes(p), lz4);
        bad_nsym += ncd(TestCase{"p", to_bytes(p)}, TestCase{"q", to_bytes(q)}, lz4) !=
                    ncd(TestCase{"q", to_bytes(q)}, TestCase{"p", to_bytes(p)}, lz4);
        const double self = ncd(as_bytes(p), as_bytes(p), lz4);
        worst_self = std::max(worst_self, self);
        bad_self += self > ncd_self_epsilon;
    }
    const int total = bad_triangle + bad_msym + bad_jrange + bad_jid + bad_nsym + bad_self;
    std::ostringstream d;
    d << "1000 inputs each; violations: triangle=" << bad_triangle << " manhattan-symmetry=" << bad_msym
      << " jaccard-range=" << bad_jrange << " jaccard-identity=" << bad_jid << " ncd-symmetry=" << bad_nsym
      << " ncd(x,x)>eps=" << bad_self << fmt("; worst ncd(x,x)=%.4f", worst_self)
      << fmt(" (eps=%.2f)", ncd_self_epsilon);
    return {total == 0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cli" && i + 1 < argc) cli_path = argv[++i];
        else if (a == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
        else {
            std::cerr << "usage: acceptance --cli <divprio binary> [--only N]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"greedy ordering matches naive oracle", greedy_oracle},
        {"APFD matches walk oracle", apfd_oracle},
        {"diversity techniques beat random on clustered corpus", diversity_beats_random},
        {"sanity check underperforms random", sanity_check_inverts},
        {"performance ordering at n=1000", performance_ordering},
        {"MinHash estimator quality and merge", minhash_quality},
        {"statistics correctness", statistics_correctness},
        {"byte-identical orders across runs and job counts", determinism},
        {"metric axioms", metric_axioms},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && static_cast<int>(i + 1) != only) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all passed")
              << std::endl;
    return failed ? 1 : 0;
}
