#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "support/fixtures.hpp"
#include "wsc/cli.hpp"
#include "wsc/io.hpp"

namespace wsc {
namespace {

using io::Json;
namespace fs = std::filesystem;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "composer");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("composer-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string file(const std::string& name, const std::string& text) const {
        io::write_text_file(path_ / name, text);
        return (path_ / name).string();
    }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

TEST(Solve, NlpInstance) {
    auto r = run({"solve", "--model", "name", "--instance", test::fixture_path("nlp.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["report"]["length"], 5);
    EXPECT_EQ(j["report"]["valid"], true);
}

TEST(Solve, GoalInsideInit) {
    TempDir dir;
    auto path = dir.file("trivial.json", R"({"model":"name","services":[],"query":{"known":["a"],"required":["a"]}})");
    auto r = run({"solve", "--instance", path});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["report"]["length"], 0);
}

TEST(Solve, UnsolvableExitsOne) {
    TempDir dir;
    auto path = dir.file("none.json", R"({"model":"name","services":[],"query":{"known":["a"],"required":["b"]}})");
    EXPECT_EQ(run({"solve", "--instance", path}).code, 1);
}

TEST(Solve, MalformedJsonExitsTwo) {
    TempDir dir;
    auto path = dir.file("bad.json", "{\"model\": ");
    EXPECT_EQ(run({"solve", "--instance", path}).code, 2);
}

TEST(Solve, ModelMismatchExitsTwo) {
    EXPECT_EQ(run({"solve", "--model", "oo", "--instance", test::fixture_path("nlp.json")}).code, 2);
}

TEST(Solve, MissingFileAndBadFlagsExitTwo) {
    EXPECT_EQ(run({"solve", "--instance", "/nonexistent/x.json"}).code, 2);
    EXPECT_EQ(run({"solve"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Solve, EveryFixtureModel) {
    for (const char* f : {"score_example.json", "hierarchical.json", "university.json", "transport.json"}) {
        auto r = run({"solve", "--instance", test::fixture_path(f)});
        EXPECT_EQ(r.code, 0) << f << ": " << r.err;
    }
}

TEST(Solve, IgnoreRulesMakesUniversityUnsolvable) {
    EXPECT_EQ(run({"solve", "--ignore-rules", "--instance", test::fixture_path("university.json")}).code, 1);
}

TEST(Solve, CsvFormat) {
    auto r = run({"solve", "--format", "csv", "--instance", test::fixture_path("hierarchical.json")});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "model,time_ms,solved,length,execution_path,valid");
    EXPECT_NE(r.out.find("hierarchical,"), std::string::npos);
}

TEST(Validate, WrittenCompositionValidates) {
    TempDir dir;
    auto comp = (dir.path() / "comp.json").string();
    for (const char* f : {"nlp.json", "hierarchical.json", "university.json", "transport.json"}) {
        ASSERT_EQ(run({"solve", "--instance", test::fixture_path(f), "--out", comp}).code, 0) << f;
        auto r = run({"validate", "--instance", test::fixture_path(f), "--composition", comp});
        EXPECT_EQ(r.code, 0) << f << ": " << r.out << r.err;
    }
}

TEST(Validate, InvalidOrderExitsOne) {
    TempDir dir;
    auto comp = dir.file("c.json", R"({"calls":["conjugateVerb"]})");
    auto r = run({"validate", "--instance", test::fixture_path("nlp.json"), "--composition", comp});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(Json::parse(r.out)["firstViolation"]["position"], 1);
}

TEST(Validate, UnknownServiceExitsTwo) {
    TempDir dir;
    auto comp = dir.file("c.json", R"({"calls":["nope"]})");
    EXPECT_EQ(run({"validate", "--instance", test::fixture_path("nlp.json"), "--composition", comp}).code, 2);
}

TEST(Validate, EmptyCompositionEmptyGoal) {
    TempDir dir;
    auto inst = dir.file("i.json", R"({"model":"name","services":[],"query":{"known":[],"required":[]}})");
    auto comp = dir.file("c.json", R"({"calls":[]})");
    EXPECT_EQ(run({"validate", "--instance", inst, "--composition", comp}).code, 0);
}

TEST(Generate, WritesInstanceAndTruth) {
    TempDir dir;
    auto out = (dir.path() / "g").string();
    auto r = run({"generate", "--model", "online", "--seed", "3", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir.path() / "g" / "instance.json"));
    EXPECT_TRUE(fs::exists(dir.path() / "g" / "groundtruth.json"));
    EXPECT_TRUE(fs::exists(dir.path() / "g" / "events.jsonl"));
    auto planted = io::read_json_file(dir.path() / "g" / "groundtruth.json");
    EXPECT_TRUE(planted.contains("plantedChain"));
}

TEST(Generate, BadConfigExitsTwo) {
    TempDir dir;
    auto cfg = dir.file("cfg.json", R"({"noSuchKey": 1})");
    EXPECT_EQ(run({"generate", "--model", "name", "--config", cfg, "--out", (dir.path() / "g").string()}).code, 2);
}

TEST(Bench, FourGeneratedInstances) {
    TempDir dir;
    for (int s = 1; s <= 4; ++s)
        ASSERT_EQ(run({"generate", "--model", "name", "--seed", std::to_string(s), "--out",
                       (dir.path() / ("i" + std::to_string(s))).string()}).code, 0);
    auto r = run({"bench", "--dir", dir.path().string(), "--jobs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = Json::parse(r.out);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& row : rows) EXPECT_EQ(row["valid"], true);
}

TEST(Bench, EmptyDirectory) {
    TempDir dir;
    auto r = run({"bench", "--dir", dir.path().string(), "--format", "csv"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "file,model,time_ms,solved,length,execution_path,valid,error\n");
}

TEST(Bench, CorruptInstanceBecomesErrorRow) {
    TempDir dir;
    fs::copy_file(test::fixture_path("nlp.json"), dir.path() / "a.json");
    fs::copy_file(test::fixture_path("score_example.json"), dir.path() / "b.json");
    dir.file("c.json", "{ not json");
    auto rows = Json::parse(run({"bench", "--dir", dir.path().string()}).out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0]["valid"], true);
    EXPECT_EQ(rows[1]["valid"], true);
    EXPECT_TRUE(rows[2].contains("error"));
}

TEST(Online, DrivingConditionsStream) {
    TempDir dir;
    auto out = (dir.path() / "events.jsonl").string();
    ASSERT_EQ(run({"online", "--stream", test::fixture_path("driving_conditions.jsonl"), "--out", out}).code, 0);
    std::ifstream in(out);
    std::vector<Json> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(Json::parse(line));
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[2]["event"], "swapped_to_backup");
}

TEST(Online, MalformedStreamExitsTwo) {
    TempDir dir;
    auto stream = dir.file("s.jsonl", "{\"op\":\"register_service\",\"name\":\"a\",\"in\":[],\"out\":[\"x\"]}\nnot json\n");
    EXPECT_EQ(run({"online", "--stream", stream}).code, 2);
}

}  // namespace
}  // namespace wsc
