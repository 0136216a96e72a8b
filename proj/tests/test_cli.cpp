#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "twosq/cli.hpp"

using namespace twosq;

namespace {

namespace fs = std::filesystem;

struct Run {
    int code;
    std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string config_path(const std::string& name) { return std::string(TWOSQ_CONFIG_DIR) + "/" + name; }

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("twosq-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }

    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p) << text;
        return p.string();
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
    static inline int counter_ = 0;
};

const char* small_ladder_config = R"({
  "forms": [[1, 0], [5, 4], [1, 4], [9, 8]],
  "region": [[1, 0], [2, 0], [2, 1], [1, 1]],
  "j": "star",
  "X_ladder": [50, 100],
  "prime_cutoff": 100
})";

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

}  // namespace

TEST(Cli, SelftestSubset) {
    const auto r = run_cli({"selftest", "--only", "2", "--config", config_path("demo.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("PASS criterion 2"), std::string::npos);
}

TEST(Cli, EvenModulusIsAConfigFailure) {
    TempDir t;
    const auto p = t.write("even.json", R"({
  "forms": [[1, 0], [5, 4], [1, 4], [9, 8]],
  "region": [[1, 0], [2, 0], [2, 1], [1, 1]],
  "d": [2, 1, 1, 1],
  "D": [2, 1, 1, 1]
})");
    const auto r = run_cli({"arch", "--config", p});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("is even"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST(Cli, TwoAdicFaultInjection) {
    const auto good = run_cli({"two-adic", "--config", config_path("demo.json")});
    EXPECT_EQ(good.code, 0) << good.err;
    const auto bad = run_cli({"two-adic", "--config", config_path("demo.json"), "--inject-fault"});
    EXPECT_EQ(bad.code, 2);
}

TEST(Cli, MalformedJsonReportsLine) {
    TempDir t;
    const auto p = t.write("broken.json", "{\n  \"forms\": [[1, 0],\n  ]\n}\n");
    const auto r = run_cli({"arch", "--config", p});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, WrongTypeNamesTheField) {
    TempDir t;
    const auto p = t.write("type.json", R"({
  "forms": [[1, 0], [5, 4], [1, 4], [9, "8"]],
  "region": [[1, 0], [2, 0], [2, 1], [1, 1]]
})");
    const auto r = run_cli({"arch", "--config", p});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("'forms[3][1]'"), std::string::npos) << r.err;
}

TEST(Cli, UnknownFieldRejected) {
    TempDir t;
    const auto p = t.write("extra.json", R"({
  "forms": [[1, 0], [5, 4], [1, 4], [9, 8]],
  "region": [[1, 0], [2, 0], [2, 1], [1, 1]],
  "colour": "blue"
})");
    const auto r = run_cli({"arch", "--config", p});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("'colour'"), std::string::npos) << r.err;
}

TEST(Config, SerialisationRoundTrip) {
    for (const char* name : {"demo.json", "demo_D5111.json", "demo_D5511.json", "k1_unit_profile.json"}) {
        const std::string once = serialize_config(parse_config(read_file(config_path(name))));
        EXPECT_EQ(serialize_config(parse_config(once)), once) << name;
    }
    const std::string rational = R"({
  "forms": [[1, 0], [5, 4], [1, 4], [9, 8]],
  "region": [["3/2", 0], [2, "1/3"], ["5/3", 1], [1, "1/2"]],
  "X_ladder": ["7/2", 100]
})";
    const auto cfg = parse_config(rational);
    EXPECT_EQ(cfg.region.vertices()[0].x, Rational(3, 2));
    EXPECT_EQ(cfg.X_ladder[0], Rational(7, 2));
    const std::string once = serialize_config(cfg);
    EXPECT_EQ(serialize_config(parse_config(once)), once);
}

TEST(Cli, CsvAndJsonCarryTheSameNumbers) {
    TempDir t;
    const auto p = t.write("ladder.json", small_ladder_config);
    const auto js = run_cli({"asymptotic", "--config", p, "--format", "json"});
    const auto cs = run_cli({"asymptotic", "--config", p, "--format", "csv"});
    ASSERT_EQ(js.code, 0) << js.err;
    ASSERT_EQ(cs.code, 0) << cs.err;

    const auto lines = split(cs.out, '\n');
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "X,S,S_over_X2,c,rel_err");
    const json doc = json::parse(js.out);
    const auto& rows = doc["rows"];
    ASSERT_EQ(rows.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto cells = split(lines[i + 1], ',');
        ASSERT_EQ(cells.size(), 5u);
        EXPECT_EQ(std::stoull(cells[1]), rows[i]["S"].get<u64>());
        EXPECT_EQ(std::stod(cells[2]), rows[i]["S_over_X2"].get<double>());
        EXPECT_EQ(std::stod(cells[3]), rows[i]["c"].get<double>());
        EXPECT_EQ(std::stod(cells[4]), rows[i]["rel_err"].get<double>());
        EXPECT_NE(js.out.find(cells[3]), std::string::npos);
    }
    EXPECT_EQ(doc["reports"][0]["delta"], "4/2^0");
    EXPECT_EQ(doc["reports"][1]["route"], route_local);
}

TEST(Cli, WorkerCountDoesNotChangeOutput) {
    TempDir t;
    const auto p = t.write("ladder.json", small_ladder_config);
    const auto one = run_cli({"sum", "--config", p, "--workers", "1", "--X", "300"});
    const auto three = run_cli({"sum", "--config", p, "--workers", "3", "--X", "300"});
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_EQ(one.out, three.out);
}

TEST(Cli, OutFileAndRationalX) {
    TempDir t;
    const auto out = t.file("sum.json");
    const auto r = run_cli({"sum", "--config", config_path("demo.json"), "--X", "7/2", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const json doc = json::parse(read_file(out));
    EXPECT_EQ(doc["S"], 2048);
    EXPECT_EQ(doc["X"], "7/2");
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
    EXPECT_EQ(run_cli({}).code, 1);
    EXPECT_EQ(run_cli({"arch"}).code, 1);
    EXPECT_EQ(run_cli({"arch", "--config", "/nonexistent/twosq.json"}).code, 1);
    EXPECT_EQ(run_cli({"arch", "--config", config_path("demo.json"), "--format", "xml"}).code, 1);
    EXPECT_EQ(run_cli({"sum", "--config", config_path("demo.json"), "--X", "-3"}).code, 1);
}

TEST(Cli, ArchAgreesOnDemo) {
    const auto r = run_cli({"arch", "--config", config_path("demo.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["agree"], true);
}
