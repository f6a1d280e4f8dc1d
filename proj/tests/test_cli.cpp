#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "epistemic/cli.hpp"

namespace epi::cli {
namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& rel) { return std::string(EPI_DATA_DIR) + "/" + rel; }

std::string temp_file(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path.string();
}

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

TEST(Cli, ExitCodesForSpecs) {
    EXPECT_EQ(run_cli({"check", "--spec", "1s"}).code, 0);
    auto two = run_cli({"check", "--spec", "2"});
    EXPECT_EQ(two.code, 1);
    EXPECT_TRUE(has(two.out, "Fails")) << two.out;
    EXPECT_TRUE(has(two.out, "indistinguishable partner"));
    EXPECT_EQ(run_cli({"check", "--spec", "4a"}).code, 0);
    EXPECT_EQ(run_cli({"check", "--spec", "6", "--slot", "2"}).code, 2);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"check"}).code, 2);
    EXPECT_EQ(run_cli({"check", "--spec", "bogus"}).code, 2);
    EXPECT_EQ(run_cli({"check", "--spec", "2", "--formula", "true"}).code, 2);
    EXPECT_EQ(run_cli({"check", "--formula", "K[C1](", "--at", "end"}).code, 2);
    EXPECT_EQ(run_cli({"check", "--spec", "2", "--format", "xml"}).code, 2);
    EXPECT_EQ(run_cli({"check", "--spec", "2", "--scenario", "nowhere"}).code, 2);
    EXPECT_EQ(run_cli({"check", "--spec", "2", "--scenario", "file:/does/not/exist.json"}).code, 2);
    EXPECT_EQ(run_cli({"check", "--spec", "1s", "--engine", "naive"}).code, 2);
    auto key = run_cli({"check", "--formula", "k12 == 1", "--at", "1"});
    EXPECT_EQ(key.code, 2);
    EXPECT_TRUE(has(key.err, "--engine naive"));
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, FormulaCheck) {
    EXPECT_EQ(run_cli({"check", "--formula", "C1.slot_request == 1 && !C1.rr[1] => K[C1](conflict(1))", "--at", "res:1"})
                  .code,
              0);
    EXPECT_EQ(run_cli({"check", "--formula", "K[C1](C2.msg == 1)", "--at", "end"}).code, 1);
    EXPECT_EQ(run_cli({"check", "--formula", "true", "--at", "7"}).code, 2);
}

TEST(Cli, RefineConflictFreeChain) {
    auto r = run_cli({"refine", "--predicates", data("predicates/cf_chain.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(has(r.out, "cf1: Fails"));
    EXPECT_TRUE(has(r.out, "cf2: Fails"));
    EXPECT_TRUE(has(r.out, "cf3: Holds"));
    EXPECT_TRUE(has(r.out, "result: Holds with cf3"));
    EXPECT_EQ(run_cli({"refine", "--predicates", data("predicates/cf1.json")}).code, 1);
    EXPECT_EQ(run_cli({"refine", "--predicates", temp_file("epi_empty.json", "[]")}).code, 2);
    EXPECT_EQ(run_cli({"refine"}).code, 2);
    auto mixed = temp_file("epi_mixed.json",
                           R"([{"name":"a","target":"kc","expr":"true"},{"name":"b","target":"dlvrd","expr":"true"}])");
    EXPECT_EQ(run_cli({"refine", "--predicates", mixed}).code, 2);
    auto bad = temp_file("epi_bad.json", R"([{"name":"a","target":"kc","expr":"rr[9]"}])");
    EXPECT_EQ(run_cli({"refine", "--predicates", bad}).code, 2);
}

TEST(Cli, RefineJson) {
    auto r = run_cli({"refine", "--predicates", data("predicates/cf_chain.json"), "--format", "json"});
    ASSERT_EQ(r.code, 0);
    auto j = json::parse(r.out);
    ASSERT_EQ(j["candidates"].size(), 3u);
    EXPECT_EQ(j["candidates"][0]["candidate"], "cf1");
    EXPECT_EQ(j["candidates"][0]["verdict"], "Fails");
    EXPECT_FALSE(j["candidates"][0]["witnesses"].empty());
    EXPECT_EQ(j["candidates"][2]["verdict"], "Holds");
    EXPECT_EQ(json::parse(j.dump()), j);
}

TEST(Cli, Synthesize) {
    auto r = run_cli({"synthesize", "--formula", "K[C1](C1.msg == 1)", "--at", "end"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has(r.out, "predicate: msg"));
    EXPECT_TRUE(has(r.out, "round trip: Holds"));
    auto kc = run_cli({"synthesize", "--target", "kc", "--mode", "conservative"});
    EXPECT_EQ(kc.code, 0) << kc.out;
    EXPECT_TRUE(has(kc.out, "with the synthesized kc: Holds"));
    EXPECT_EQ(run_cli({"synthesize", "--formula", "C1.msg == 1"}).code, 2);
    EXPECT_EQ(run_cli({"synthesize"}).code, 2);
}

TEST(Cli, TraceCollisionPair) {
    const std::string rows =
        "| Agent C2 | 0 | 0 | 0 || 0 | 0 | 0 |\n"
        "| Agent C3 | 0 | 0 | 0 || 0 | 0 | 0 |\n"
        "| rr[s]    | 0 | 1 | 0 || 0 | 1 | 0 |\n";
    auto right = run_cli({"trace", "--assign", "slot_request=[2,0,0];msg=[1,1,1]"});
    EXPECT_EQ(right.code, 0);
    EXPECT_EQ(right.out,
              "| s        | 1 | 2 | 3 || 4 | 5 | 6 |\n"
              "| Agent C1 | 0 | 1 | 0 || 0 | 1 | 0 |\n" +
                  rows + "slot_request = [2,0,0], msg = [1,1,1]\n");
    auto left = run_cli({"trace", "--assign", "slot_request=[2,2,2];msg=[1,1,1]"});
    EXPECT_EQ(left.code, 0);
    EXPECT_TRUE(has(left.out, "| Agent C2 | 0 | 1 | 0 || 0 | 1 | 0 |")) << left.out;
    EXPECT_TRUE(has(left.out, "| rr[s]    | 0 | 1 | 0 || 0 | 1 | 0 |"));
    EXPECT_EQ(run_cli({"trace"}).code, 2);
    EXPECT_EQ(run_cli({"trace", "--assign", "slot_request=[2,0];msg=[1,1,1]"}).code, 2);
}

TEST(Cli, TraceJson) {
    auto r = run_cli({"trace", "--assign", "slot_request=[1,3,0];msg=[1,0,1]", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["rr"], json::parse("[1,0,1,1,0,0]"));
    EXPECT_EQ(j["contrib"][0], json::parse("[1,0,0,1,0,0]"));
}

TEST(Cli, ScenarioFiles) {
    EXPECT_EQ(run_cli({"check", "--spec", "1c", "--scenario", "file:" + data("scenarios/referendum_conservative.json")}).code,
              0);
    auto custom = run_cli({"check", "--spec", "6", "--scenario", "file:" + data("scenarios/c1_sends_one.json")});
    EXPECT_EQ(custom.code, 1);
    EXPECT_TRUE(has(custom.out, "2 of 3")) << custom.out;
    auto pinned = run_cli({"trace", "--scenario", "file:" + data("scenarios/all_request_slot2.json")});
    EXPECT_EQ(pinned.code, 2);
    auto clash = run_cli({"check", "--spec", "1c", "--mode", "speculative", "--scenario",
                          "file:" + data("scenarios/referendum_conservative.json")});
    EXPECT_EQ(clash.code, 2);
}

TEST(Cli, OutputIsDeterministic) {
    for (std::vector<std::string> args :
         {std::vector<std::string>{"check", "--spec", "2", "--format", "json"},
          std::vector<std::string>{"refine", "--predicates", data("predicates/rcvd1_chain.json")},
          std::vector<std::string>{"synthesize", "--formula", "K[C2](!conflict(1))", "--format", "json"}}) {
        auto a = run_cli(args), b = run_cli(args);
        EXPECT_EQ(a.code, b.code);
        EXPECT_EQ(a.out, b.out);
    }
}

TEST(Cli, OracleSmall) {
    auto ok = run_cli({"oracle", "--formulas", "5", "--seed", "3"});
    EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
    EXPECT_TRUE(has(ok.out, "disagreements: 0"));
    auto bad = run_cli({"oracle", "--formulas", "0", "--inject-fault"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_TRUE(has(bad.out, "engines disagree"));
}

}  // namespace
}  // namespace epi::cli
