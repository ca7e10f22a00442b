#include <gtest/gtest.h>

#include <cmath>

#include "rfls/config.hpp"
#include "rfls/errors.hpp"
#include "rfls/rng.hpp"
#include "rfls/sim.hpp"
#include "rfls/synthesis.hpp"

namespace sim = rfls::sim;
namespace ref = rfls::homodyne::reference;

namespace {

const sim::LoopGains& gains() {
  static const sim::LoopGains g = [] {
    auto cfg = rfls::config::default_config();
    cfg.delay.realization = rfls::config::RealizationKind::paper;
    const auto model = rfls::config::build_model(cfg);
    return sim::loop_gains(ref::tabulated_design(), model.compact);
  }();
  return g;
}

sim::SimConfig short_config() {
  sim::SimConfig c;
  c.horizon = 2e-5;
  c.runs = 8;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Rng, StreamsAreDistinctAndReproducible) {
  EXPECT_EQ(rfls::rng::stream_seed(42, 0), rfls::rng::stream_seed(42, 0));
  EXPECT_NE(rfls::rng::stream_seed(42, 0), rfls::rng::stream_seed(42, 1));
  EXPECT_NE(rfls::rng::stream_seed(42, 0), rfls::rng::stream_seed(43, 0));
  rfls::rng::Xoshiro256pp a(7), b(7);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
    const double z = a.normal();
    b.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Sim, ZeroNoiseStaysAtTheOrigin) {
  auto c = short_config();
  c.kappa = 0.0;
  c.measurement_noise = false;
  const auto r = sim::simulate_run(c, gains(), 1);
  EXPECT_EQ(r.filter_error, 0.0);
  EXPECT_EQ(r.smoother_error, 0.0);
  EXPECT_FALSE(r.divergent);
}

TEST(Sim, SameSeedSameRun) {
  const auto c = short_config();
  const auto a = sim::simulate_run(c, gains(), 12345);
  const auto b = sim::simulate_run(c, gains(), 12345);
  const auto d = sim::simulate_run(c, gains(), 12346);
  EXPECT_EQ(a.filter_error, b.filter_error);
  EXPECT_EQ(a.smoother_error, b.smoother_error);
  EXPECT_NE(a.filter_error, d.filter_error);
}

TEST(Sim, EnsembleIndependentOfThreadCount) {
  auto c = short_config();
  const auto one = sim::run_ensemble(c, gains());
  c.threads = 3;
  const auto three = sim::run_ensemble(c, gains());
  ASSERT_EQ(one.size(), three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].filter_error, three[i].filter_error);
    EXPECT_EQ(one[i].smoother_error, three[i].smoother_error);
  }
}

TEST(Sim, SingleRunReport) {
  auto c = short_config();
  c.runs = 1;
  const auto runs = sim::run_ensemble(c, gains());
  const auto rep = sim::summarize(runs, sim::Estimator::smoother);
  EXPECT_EQ(rep.runs_completed, 1);
  EXPECT_DOUBLE_EQ(rep.error_covariance, runs[0].smoother_error * runs[0].smoother_error);
  EXPECT_TRUE(std::isinf(rep.standard_error));
}

TEST(Sim, SummaryStatistics) {
  std::vector<sim::RunResult> runs(4);
  const double e[4] = {1.0, -2.0, 3.0, 0.5};
  for (int i = 0; i < 4; ++i) runs[i].filter_error = e[i];
  runs[3].divergent = true;
  const auto rep = sim::summarize(runs, sim::Estimator::ngcf);
  EXPECT_EQ(rep.runs_completed, 3);
  EXPECT_EQ(rep.runs_divergent, 1);
  EXPECT_FALSE(rep.healthy);
  EXPECT_DOUBLE_EQ(rep.error_covariance, (1.0 + 4.0 + 9.0) / 3.0);
  // Sample standard deviation of {1, 4, 9} over √3.
  const double mean = 14.0 / 3.0;
  const double var = ((1 - mean) * (1 - mean) + (4 - mean) * (4 - mean) + (9 - mean) * (9 - mean)) / 2;
  EXPECT_NEAR(rep.standard_error, std::sqrt(var / 3.0), 1e-14);
}

TEST(Sim, EulerMaruyamaIsFirstOrderOnTheDrift) {
  auto c = short_config();
  c.kappa = 0.0;
  c.measurement_noise = false;
  c.phi0 = 0.05;
  c.horizon = 4e-5;
  c.delta = 3.2e-6;
  double e[3];
  const double dts[3] = {4e-8, 2e-8, 1e-8};
  for (int i = 0; i < 3; ++i) {
    c.dt = dts[i];
    e[i] = sim::simulate_run(c, gains(), 1).filter_error;
  }
  const double d1 = std::abs(e[0] - e[1]);
  const double d2 = std::abs(e[1] - e[2]);
  ASSERT_GT(d2, 0.0);
  EXPECT_NEAR(d1 / d2, 2.0, 0.5);
}

TEST(Sim, DivergenceIsFlagged) {
  auto c = short_config();
  auto g = gains();
  g.Ac = 1e7 * rfls::Matrix::Identity(g.Ac.rows(), g.Ac.cols());
  const auto r = sim::simulate_run(c, g, 3);
  EXPECT_TRUE(r.divergent);
}

TEST(Sim, SectorRange) {
  const double e = sim::sector_range(0.4);
  EXPECT_NEAR(1.0 - std::sin(e) / e, 0.4, 1e-12);
  EXPECT_EQ(sim::sector_range(0.0), 0.0);
  EXPECT_TRUE(std::isinf(sim::sector_range(1.0)));
}

TEST(Sim, ConfigValidation) {
  auto c = short_config();
  c.dt = 0.0;
  EXPECT_THROW(sim::validate(c), rfls::ConfigError);
  c = short_config();
  c.horizon = 50 * c.dt;
  EXPECT_THROW(sim::validate(c), rfls::ConfigError);
  c = short_config();
  c.delta = 3.15e-6 + 1e-9;
  EXPECT_THROW(sim::validate(c), rfls::ConfigError);
  c = short_config();
  c.runs = 0;
  EXPECT_THROW(sim::validate(c), rfls::ConfigError);
  EXPECT_NO_THROW(sim::validate(short_config()));
}

TEST(Sim, LoopGainsNeedTheHomodyneShape) {
  auto cfg = rfls::config::default_config();
  cfg.delay.realization = rfls::config::RealizationKind::paper;
  const auto model = rfls::config::build_model(cfg);
  const auto g = sim::loop_gains(ref::tabulated_design(), model.compact);
  EXPECT_EQ(g.Ac.rows(), 3);
  EXPECT_EQ(g.Bc.cols(), 1);
  EXPECT_EQ(g.Gc.cols(), 1);
  EXPECT_EQ(g.Cc.rows(), 1);
}
