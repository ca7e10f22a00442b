#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/artifacts.hpp"
#include "cli/cli.hpp"
#include "cli/pipeline.hpp"
#include "rfls/errors.hpp"
#include "rfls/serialize.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rfls_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "rfls");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return rfls::cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kOptimized = R"(
[synthesis]
optimize = true
starts = 2
)";

}  // namespace

TEST_F(CliTest, SynthWritesSolutionAndManifest) {
  const auto cfg = write_config("a.cfg", kOptimized);
  const auto out = (dir_ / "out").string();
  ASSERT_EQ(run({"synth", "--config", cfg, "--out-dir", out}), 0) << err_.str();
  const auto j = nlohmann::json::parse(slurp(fs::path(out) / "synthesis.json"));
  EXPECT_LE(j["design"]["cost_bound"].get<double>(), 0.16);
  EXPECT_TRUE(j["certificate"]["passed"].get<bool>());
  const auto m = nlohmann::json::parse(slurp(fs::path(out) / "manifest.json"));
  EXPECT_EQ(m["command"], "synth");
  EXPECT_EQ(m["master_seed"], 42);
  ASSERT_EQ(m["artifacts"].size(), 1u);
  EXPECT_EQ(m["artifacts"][0]["sha256"],
            rfls::cli::sha256_hex(slurp(fs::path(out) / "synthesis.json")));
}

TEST_F(CliTest, TabulatedPointIsInfeasibleAndLeavesNothing) {
  const auto out = dir_ / "out";
  EXPECT_EQ(run({"synth", "--paper-realization", "--out-dir", out.string()}), 3);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_NE(err_.str().find("control Riccati"), std::string::npos) << err_.str();
}

TEST_F(CliTest, InfeasibleLambdaBoxExitsThree) {
  const auto cfg = write_config("box.cfg", R"(
[synthesis]
optimize = true
starts = 2
lambda_lo = [2.0, 2.0, 2.0, 2.0]
lambda_hi = [3.0, 3.0, 3.0, 3.0]
)");
  const auto out = dir_ / "out";
  EXPECT_EQ(run({"synth", "--config", cfg, "--out-dir", out.string()}), 3);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, ZeroSectorWidthSucceeds) {
  const auto cfg = write_config("g0.cfg", R"(
[plant]
gamma = 0.0
[synthesis]
optimize = true
starts = 2
)");
  EXPECT_EQ(run({"synth", "--config", cfg, "--out-dir", (dir_ / "out").string()}), 0)
      << err_.str();
}

TEST_F(CliTest, ConfigurationErrorsExitTwo) {
  const auto bad = write_config("bad.cfg", "[plant]\ngama = 1\n");
  EXPECT_EQ(run({"synth", "--config", bad, "--out-dir", (dir_ / "o").string()}), 2);
  EXPECT_NE(err_.str().find("gama"), std::string::npos);
  EXPECT_EQ(run({"synth", "--config", (dir_ / "missing.cfg").string()}), 2);
  EXPECT_EQ(run({"synth", "--target-output", "sideways"}), 2);
  EXPECT_EQ(run({"sweep", "--grid", "0,0.5", "--out-dir", (dir_ / "o").string()}), 2);
  EXPECT_EQ(run({"mc", "--runs", "0", "--out-dir", (dir_ / "o").string()}), 2);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, HelpAndVersionExitZero) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("reproduce-paper"), std::string::npos);
  EXPECT_EQ(run({"--version"}), 0);
}

TEST_F(CliTest, ValidateWritesNothing) {
  EXPECT_EQ(run({"validate", "--out-dir", (dir_ / "o").string()}), 0);
  EXPECT_NE(out_.str().find("is valid"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, SweepIsDeterministicAndSingleRowWorks) {
  const auto cfg = write_config("a.cfg", kOptimized);
  const auto a = dir_ / "a", b = dir_ / "b", c = dir_ / "c";
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out-dir", a.string()}), 0) << err_.str();
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out-dir", b.string()}), 0);
  EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
  const std::string csv = slurp(a / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "delta2,psa,pf,hurwitz");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 22);
  ASSERT_EQ(run({"sweep", "--config", cfg, "--grid", "-1", "--out-dir", c.string()}), 0);
  const std::string one = slurp(c / "sweep.csv");
  EXPECT_EQ(std::count(one.begin(), one.end(), '\n'), 2);
  EXPECT_EQ(one.substr(one.find('\n') + 1, 3), "-1,");
}

TEST_F(CliTest, UnstableNominalLoopExitsFive) {
  // An initial point that is synthesizable but whose design is replaced by
  // the tabulated one on a plant it was not designed for.
  const auto cfg = write_config("u.cfg", R"(
[plant]
lambda = -5.0e6
)");
  const int code = run({"sweep", "--config", cfg, "--tabulated-gains", "--out-dir",
                        (dir_ / "o").string()});
  EXPECT_EQ(code, 5) << err_.str();
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, MonteCarloOutputs) {
  const auto cfg = write_config("mc.cfg", R"(
[simulation]
horizon = 2e-5
)");
  const auto out = dir_ / "mc";
  ASSERT_EQ(run({"mc", "--config", cfg, "--tabulated-gains", "--runs", "3", "--seed", "5",
                 "--out-dir", out.string()}),
            0)
      << err_.str();
  const auto j = nlohmann::json::parse(slurp(out / "mc.json"));
  EXPECT_EQ(j["smoother"]["runs_completed"], 3);
  EXPECT_EQ(j["simulation"]["seed"], 5);
  EXPECT_TRUE(j.contains("normalization"));
  const std::string csv = slurp(out / "errors.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["master_seed"], 5);
  EXPECT_EQ(m["artifacts"].size(), 2u);
}

TEST_F(CliTest, GridParsing) {
  EXPECT_EQ(rfls::cli::parse_grid("3"), (std::vector<double>{0.0, -0.5, -1.0}));
  EXPECT_EQ(rfls::cli::parse_grid("0,-0.25"), (std::vector<double>{0.0, -0.25}));
  EXPECT_EQ(rfls::cli::parse_grid("-1"), (std::vector<double>{-1.0}));
  EXPECT_THROW(rfls::cli::parse_grid("a,b"), rfls::ConfigError);
  EXPECT_THROW(rfls::cli::parse_grid(""), rfls::ConfigError);
}

TEST(Artifacts, Sha256KnownVector) {
  EXPECT_EQ(rfls::cli::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
