#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "deltaforge.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

// Runs the CLI through the shell; stderr is discarded unless merged by the caller.
Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" DELTAFORGE_CLI_PATH "\" " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string spec_path(const char* name) { return std::string(DELTAFORGE_SPECS_DIR) + "/" + name; }

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("deltaforge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

} // namespace

TEST_F(CliTest, Coefficients) {
    const auto r = run("coeffs --n 4 --partition 2,2");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("c = 4\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("b = 4\n"), std::string::npos) << r.out;
    const auto s = run("coeffs --n 4 --partition 2");
    EXPECT_NE(s.out.find("b = 5\n"), std::string::npos) << s.out;
    EXPECT_EQ(run("coeffs --n 4 --partition 4").status, 2);
    EXPECT_EQ(run("coeffs --n 4 --partition 2,x").status, 2);
}

TEST_F(CliTest, CatalogListAndShow) {
    const auto l = run("catalog list");
    EXPECT_EQ(l.status, 0);
    for (const char* id : {"EUCLID_T1", "SPHERE_T2", "HYP_A", "HYP_B", "HYP_C"})
        EXPECT_NE(l.out.find(id), std::string::npos) << id;
    const auto s = run("catalog show HYP_A --n 4");
    EXPECT_EQ(s.status, 0);
    EXPECT_NE(s.out.find("[spaceform]"), std::string::npos);
    // The printed document parses back.
    const auto doc = s.out.substr(s.out.find("[spaceform]"));
    EXPECT_EQ(deltaforge::parse_spec(doc).n(), 4);
    EXPECT_EQ(run("catalog show NOPE").status, 2);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
    EXPECT_EQ(run("verify --family EUCLID_T1 --n 4").status, 2);
    EXPECT_EQ(run("verify --family EUCLID_T1 --spec x.df --n 4 --partition 2").status, 2);
    EXPECT_EQ(run("verify --family NOPE --n 4 --partition 2").status, 2);
    EXPECT_EQ(run("verify --family EUCLID_T1 --n 4 --partition 2 --param a=1.5").status, 2);
    EXPECT_EQ(run("verify --family EUCLID_T1 --n 4 --partition 2 --points grid:0").status, 2);
    EXPECT_EQ(run("verify --spec /nonexistent.df --partition 2").status, 2);
    EXPECT_EQ(run("--help").status, 0);
}

TEST_F(CliTest, VerifyPassesAndWritesFiles) {
    const auto json = dir_ / "r.json";
    const auto csv = dir_ / "r.csv";
    const auto r = run("verify --family EUCLID_T1 --n 4 --partition 2,2 --points random:3 --starts 4 --out " +
                       json.string() + " --emit-csv " + csv.string());
    EXPECT_EQ(r.status, 0);
    const auto j = nlohmann::json::parse(slurp(json));
    EXPECT_EQ(j["records"].size(), 3u);
    EXPECT_TRUE(j["summary"]["all_pass"].get<bool>());
    EXPECT_NE(slurp(csv).find("gap"), std::string::npos);
}

TEST_F(CliTest, VerifyPrintsJsonWithoutOut) {
    const auto r = run("verify --family EUCLID_T1 --n 3 --partition 2 --points random:1 --starts 2");
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["schema_version"], "1");
}

TEST_F(CliTest, NonIdealSpecExitsOne) {
    const auto json = dir_ / "s4.json";
    const auto r = run("verify --spec " + spec_path("round_s4.df") + " --partition 2 --points random:2 --starts 4 --out " +
                       json.string());
    EXPECT_EQ(r.status, 1);
    const auto j = nlohmann::json::parse(slurp(json));
    EXPECT_FALSE(j["summary"]["all_pass"].get<bool>());
    EXPECT_NEAR(j["records"][0]["gap"].get<double>(), 1.0 / 3.0, 1e-6);
    EXPECT_EQ(j["spec"]["hash"].get<std::string>().rfind("fnv1a64:", 0), 0u);
}

TEST_F(CliTest, SpecFilesVerify) {
    EXPECT_EQ(run("verify --spec " + spec_path("euclid_t1_n3.df") + " --partition 2 --points grid:2 --starts 4 --out " +
                  (dir_ / "a.json").string()).status,
              0);
    EXPECT_EQ(run("verify --spec " + spec_path("identity_e3.df") + " --partition 2 --points grid:2 --starts 2 --out " +
                  (dir_ / "b.json").string()).status,
              0);
    // A round S^3 is not (2)-ideal.
    EXPECT_EQ(run("verify --spec " + spec_path("round_s3_radius2.df") +
                  " --partition 2 --points random:1 --starts 2 --param r=3 --out " + (dir_ / "c.json").string())
                  .status,
              1);
}

TEST_F(CliTest, SweepReportsConstraintCells) {
    const auto json = dir_ / "sweep.json";
    const auto r = run("sweep --family HYP_C --n 4 --partition 2,2 --points random:1 --starts 4 --grid a=0,b=1:2:2 --out " +
                       json.string());
    EXPECT_EQ(r.status, 1);
    const auto j = nlohmann::json::parse(slurp(json));
    ASSERT_EQ(j["records"].size(), 2u);
    EXPECT_EQ(j["records"][0]["error"]["kind"], "ConstraintError");
    EXPECT_TRUE(j["records"][1]["pass"].get<bool>());
}

TEST_F(CliTest, ThreadsEnvironmentVariable) {
    const std::string args = "verify --family SPHERE_T2 --n 4 --partition 2,2 --points random:4 --starts 4 --seed 3 --out ";
    const auto a = dir_ / "a.json", b = dir_ / "b.json";
    EXPECT_EQ(run(args + a.string(), "DELTAFORGE_THREADS=1").status, 0);
    EXPECT_EQ(run(args + b.string() + " --threads 1", "DELTAFORGE_THREADS=3").status, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(run(args + a.string(), "DELTAFORGE_THREADS=zero").status, 2);
    EXPECT_EQ(run(args + a.string(), "DELTAFORGE_THREADS=0").status, 2);
}

TEST_F(CliTest, DeltaCommand) {
    const auto r = run("delta --family EUCLID_T1 --n 4 --param a=0.6 --point 2,0.5,0.3,0.1 --partition 2,2");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("ideal at this point"), std::string::npos) << r.out;
    const auto s = run("delta --spec " + spec_path("round_s4.df") + " --point 0.2,0.3,-0.1,0.5 --partition 2 --oracle 2000");
    EXPECT_EQ(s.status, 1);
    EXPECT_NE(s.out.find("not ideal at this point"), std::string::npos) << s.out;
    EXPECT_NE(s.out.find("oracle_delta_lower = 5"), std::string::npos) << s.out;
    EXPECT_EQ(run("delta --family EUCLID_T1 --n 4 --point 2,0.5 --partition 2,2").status, 2);
}
