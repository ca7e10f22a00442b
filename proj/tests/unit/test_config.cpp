#include <gtest/gtest.h>

#include <string>

#include "rfls/config.hpp"
#include "rfls/errors.hpp"

namespace cfgns = rfls::config;

namespace {

std::string error_of(const std::string& text) {
  try {
    cfgns::parse_config(text, "test.cfg");
  } catch (const rfls::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const auto c = cfgns::parse_config("", "empty");
  EXPECT_EQ(c.master_seed, 42u);
  EXPECT_EQ(c.plant.kind, cfgns::PlantKind::homodyne);
  EXPECT_EQ(c.delay.order, 2);
  EXPECT_DOUBLE_EQ(c.delay.delta, 3.1e-6);
  EXPECT_FALSE(c.synthesis.optimize);
  EXPECT_EQ(c.simulation.runs, 2000);
  EXPECT_EQ(c.sweep.points, 21);
}

TEST(Config, FullSyntax) {
  const auto c = cfgns::parse_config(R"(
seed = 7   # comment
[plant]
gamma = 0.25
alpha = 1_162.0
[delay]
realization = "companion"
[synthesis]
optimize = true
lambda = [
  0.5, 0.25,
  0.125, 0.125,
]
target_output = "delayed"
[simulation]
runs = 10
measurement = "linear"
[sweep]
grid = [0.0, -0.5, -1]
noise = "physical"
)");
  EXPECT_EQ(c.master_seed, 7u);
  EXPECT_DOUBLE_EQ(c.plant.homodyne.gamma, 0.25);
  EXPECT_DOUBLE_EQ(c.plant.homodyne.alpha, 1162.0);
  EXPECT_EQ(c.delay.realization, cfgns::RealizationKind::companion);
  EXPECT_TRUE(c.synthesis.optimize);
  ASSERT_EQ(c.synthesis.point.lambda.size(), 4);
  EXPECT_DOUBLE_EQ(c.synthesis.point.lambda(2), 0.125);
  EXPECT_EQ(c.synthesis.target, rfls::synthesis::TargetOutput::delayed);
  EXPECT_EQ(c.simulation.runs, 10);
  EXPECT_EQ(c.simulation.measurement, rfls::sim::Measurement::linear);
  EXPECT_EQ(c.sweep.grid, (std::vector<double>{0.0, -0.5, -1.0}));
  EXPECT_EQ(c.sweep.noise, rfls::covariance::NoiseModel::physical);
}

TEST(Config, MatrixPlant) {
  const auto c = cfgns::parse_config(R"(
[plant]
kind = "matrices"
A = [[-2.0]]
B1 = [[1.0, 0.0]]
C0 = [[1.0]]
C2 = [[1.0]]
D21 = [[0.0, 0.5]]
)");
  EXPECT_EQ(c.plant.kind, cfgns::PlantKind::matrices);
  const auto m = cfgns::build_model(c);
  EXPECT_EQ(m.compact.ktilde(), 0);
  EXPECT_EQ(m.compact.n(), 3);
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("[plant]\ngamma = \n").find("test.cfg:2"), std::string::npos);
  EXPECT_NE(error_of("[plant]\n\ngamma = 0.4x\n").find("test.cfg:3"), std::string::npos);
  EXPECT_NE(error_of("[plant\n").find("test.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("a = \"open\n").find("unterminated string"), std::string::npos);
  EXPECT_NE(error_of("[plant]\ngamma = 1\ngamma = 2\n").find("duplicate key"), std::string::npos);
  EXPECT_NE(error_of("[sweep]\ngrid = [0, -1\n").find("unterminated array"), std::string::npos);
}

TEST(Config, SemanticErrorsNameTheKey) {
  EXPECT_NE(error_of("[plant]\ngama = 0.4\n").find("unknown key 'gama' in [plant]"),
            std::string::npos);
  EXPECT_NE(error_of("[plants]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[plant]\ngamma = \"x\"\n").find("gamma must be a number"),
            std::string::npos);
  EXPECT_NE(error_of("[delay]\nrealization = \"fancy\"\n").find("realization"),
            std::string::npos);
  EXPECT_NE(error_of("[synthesis]\nstarts = 0\n").find("starts"), std::string::npos);
  EXPECT_NE(error_of("seed = -1\n").find("seed"), std::string::npos);
  EXPECT_NE(error_of("[simulation]\nruns = 1.5\n").find("runs must be an integer"),
            std::string::npos);
  EXPECT_NE(error_of("[plant]\nkind = \"matrices\"\nA = [[1, 2], [3]]\n").find("rectangular"),
            std::string::npos);
}

TEST(Config, PaperRealizationNeedsHomodyne) {
  auto c = cfgns::parse_config(R"(
[plant]
kind = "matrices"
A = [[-2.0]]
B1 = [[1.0, 0.0]]
C0 = [[1.0]]
C2 = [[1.0]]
D21 = [[0.0, 0.5]]
[delay]
realization = "paper"
)");
  EXPECT_THROW(cfgns::build_model(c), rfls::ConfigError);
}

TEST(Config, DerivedSettings) {
  auto c = cfgns::default_config();
  c.master_seed = 9;
  const auto sc = cfgns::simulation_config(c);
  EXPECT_EQ(sc.master_seed, 9u);
  EXPECT_DOUBLE_EQ(sc.delta, c.delay.delta);
  const auto a = cfgns::optimizer_options(c);
  c.master_seed = 10;
  EXPECT_NE(a.seed, cfgns::optimizer_options(c).seed);
  const auto model = cfgns::build_model(cfgns::default_config());
  EXPECT_EQ(cfgns::initial_point(cfgns::default_config(), model).lambda.size(), 4);
}

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(cfgns::load_config("/nonexistent/x.cfg"), rfls::ConfigError);
}
