#include "cli.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace divprio;
using testutil::read_file;
using testutil::TempDir;
using testutil::write_file;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// A small generated corpus shared by the tests in this file.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        auto r = run({"generate", "--out-dir", (dir / "corpus").string(), "--tests", "24", "--clusters", "4",
                      "--bytes", "400", "--seed", "9"});
        ASSERT_EQ(r.code, 0) << r.err;
        manifest = (dir / "corpus/manifest.json").string();
        faults = (dir / "corpus/faults.csv").string();
    }

    TempDir dir;
    std::string manifest;
    std::string faults;
};

}  // namespace

TEST_F(CliTest, PrioritizeWritesOrderAndEcho) {
    const auto out = (dir / "order.json").string();
    auto r = run({"prioritize", "-t", "NCD", "--manifest", manifest, "--out", out, "--jobs", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(read_file(out));
    EXPECT_EQ(j["technique"], "NCD");
    EXPECT_EQ(j["order"].size(), 24u);
    EXPECT_TRUE(j.contains("prep_seconds"));
    auto echo = nlohmann::json::parse(read_file(out + ".config.json"));
    EXPECT_EQ(echo["config"]["technique"], "NCD");
    EXPECT_EQ(echo["argv"][0], "prioritize");
}

TEST_F(CliTest, EveryTechniqueRuns) {
    for (auto t : all_techniques) {
        auto r = run({"prioritize", "-t", acronym(t), "--manifest", manifest, "--format", "text"});
        ASSERT_EQ(r.code, 0) << acronym(t) << ": " << r.err;
        EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 24) << acronym(t);
    }
}

TEST_F(CliTest, UsageErrors) {
    auto r = run({"prioritize", "-t", "XYZ", "--manifest", manifest});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("NCD-MS"), std::string::npos);
    EXPECT_NE(r.err.find("LSH"), std::string::npos);

    r = run({"prioritize", "-t", "LSH", "--manifest", manifest, "--lsh-perms", "10", "--lsh-bands", "3",
             "--lsh-rows", "4"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("10"), std::string::npos);

    EXPECT_EQ(run({"prioritize", "--manifest", manifest}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"--version"}).code, 0);
}

TEST_F(CliTest, InputErrors) {
    auto r = run({"prioritize", "-t", "MNH", "--manifest", (dir / "nope.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("nope.json"), std::string::npos);

    write_file(dir / "dup.json", R"([{"id":"A","path":"corpus/tests/t0.java"},{"id":"A","path":"corpus/tests/t1.java"}])");
    r = run({"prioritize", "-t", "MNH", "--manifest", (dir / "dup.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("'A'"), std::string::npos);
}

TEST_F(CliTest, EvaluateFormatsAgree) {
    const auto order = (dir / "order.txt").string();
    ASSERT_EQ(run({"prioritize", "-t", "LSH", "--manifest", manifest, "--format", "text", "--out", order}).code, 0);
    auto json = run({"evaluate", "--order", order, "--manifest", manifest, "--faults", faults, "--format", "json"});
    auto csv = run({"evaluate", "--order", order, "--manifest", manifest, "--faults", faults, "--format", "csv"});
    auto text = run({"evaluate", "--order", order, "--manifest", manifest, "--faults", faults});
    ASSERT_EQ(json.code, 0) << json.err;
    ASSERT_EQ(csv.code, 0) << csv.err;
    const double a = nlohmann::json::parse(json.out)["apfd"];
    auto second_line = csv.out.substr(csv.out.find('\n') + 1);
    auto field = second_line.substr(second_line.find(',') + 1);
    EXPECT_EQ(std::stod(field.substr(0, field.find(','))), a);
    EXPECT_EQ(text.out.rfind("APFD " + report::fixed(a, 2) + " (n=24, m=4)", 0), 0u) << text.out;
}

TEST_F(CliTest, EvaluateRejectsIncompleteOrder) {
    auto ids = load_suite(manifest).ids();
    std::string text;
    for (std::size_t i = 1; i < ids.size(); ++i) text += ids[i] + "\n";
    write_file(dir / "short.txt", text);
    auto r = run({"evaluate", "--order", (dir / "short.txt").string(), "--manifest", manifest, "--faults", faults});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(ids[0]), std::string::npos);
}

TEST_F(CliTest, CompareWritesTables) {
    const auto out = (dir / "cmp").string();
    auto r = run({"compare", "--manifest", manifest, "--faults", faults, "-t", "NCD,RND", "--seeds", "1..3",
                  "--out-dir", out, "--replicates", "100"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto report = nlohmann::json::parse(read_file(dir / "cmp/report.json"));
    EXPECT_EQ(report["comparisons"].size(), 1u);
    EXPECT_EQ(report["comparisons"][0]["x"], "NCD");
    for (auto name : {"rounds.csv", "vda.csv", "apfd.csv", "amet.csv", "comparisons.csv", "config.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / "cmp" / name)) << name;
    }
    auto rounds = read_file(dir / "cmp/rounds.csv");
    EXPECT_EQ(std::count(rounds.begin(), rounds.end(), '\n'), 1 + 3 * 2);
}

TEST_F(CliTest, CompareAllAndByteIdenticalRerun) {
    std::vector<std::string> args = {"compare", "--manifest", manifest, "--faults", faults, "-t", "all",
                                     "--seeds", "1,2", "--replicates", "100", "--no-timings", "--out-dir"};
    auto a = args, b = args;
    a.push_back((dir / "a").string());
    b.push_back((dir / "b").string());
    b.push_back("--jobs");
    b.push_back("3");
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    auto report = nlohmann::json::parse(read_file(dir / "a/report.json"));
    EXPECT_EQ(report["summaries"].size(), 7u);
    EXPECT_EQ(report["comparisons"].size(), 21u);
    for (auto name : {"rounds.csv", "vda.csv", "apfd.csv", "amet.csv", "comparisons.csv", "report.json"}) {
        EXPECT_EQ(read_file(dir / "a" / name), read_file(dir / "b" / name)) << name;
    }
}

TEST_F(CliTest, ReplayReproducesOrder) {
    const auto out = (dir / "o.json").string();
    ASSERT_EQ(run({"prioritize", "-t", "RND", "--seed", "42", "--manifest", manifest, "--out", out, "--no-timings"}).code,
              0);
    const auto first = read_file(out);
    std::filesystem::remove(out);
    auto r = run({"replay", out + ".config.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file(out), first);
    EXPECT_EQ(run({"replay", (dir / "missing.json").string()}).code, 2);
}

TEST_F(CliTest, SeedFromEnvironmentIsRecorded) {
    ::setenv("DIVPRIO_SEED", "77", 1);
    const auto out = (dir / "env.json").string();
    auto r = run({"prioritize", "-t", "RND", "--manifest", manifest, "--out", out});
    ::unsetenv("DIVPRIO_SEED");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(read_file(out))["seed"], 77);
    auto echo = nlohmann::json::parse(read_file(out + ".config.json"));
    EXPECT_EQ(echo["config"]["seed"], 77);
    auto flagged = run({"prioritize", "-t", "RND", "--manifest", manifest, "--seed", "77", "--format", "text"});
    auto replayed = run({"prioritize", "-t", "RND", "--manifest", manifest, "--seed", "78", "--format", "text"});
    EXPECT_NE(flagged.out, replayed.out);
    EXPECT_EQ(format_order(prioritize_random(load_suite(manifest), 77), OrderFormat::text), flagged.out);
}
