#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfls/config.hpp"
#include "rfls/errors.hpp"
#include "rfls/homodyne.hpp"
#include "rfls/numkernel.hpp"
#include "rfls/synthesis.hpp"

namespace syn = rfls::synthesis;
namespace ref = rfls::homodyne::reference;
using rfls::Matrix;
using rfls::Vector;

namespace {

rfls::CompactPlant paper_compact() {
  auto cfg = rfls::config::default_config();
  cfg.delay.realization = rfls::config::RealizationKind::paper;
  return rfls::config::build_model(cfg).compact;
}

rfls::CompactPlant balanced_compact() {
  return rfls::config::build_model(rfls::config::default_config()).compact;
}

syn::ScalingPoint tabulated() { return {ref::tau, Eigen::Map<const Vector>(ref::lambda, 4)}; }

Vector lam(double a, double b, double c, double d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

// A point where both Riccati equations have admissible solutions.
syn::ScalingPoint design_point() { return {1.1e-6, lam(1.0, 0.49, 1e-6, 1e-6)}; }

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// dx = -a x dt + b dW1, dy = c x dt + dW2; no uncertainty channels.
rfls::CompactPlant scalar_nominal(double a, double b, double c) {
  rfls::UncertainPlant p;
  p.A = scalar(-a);
  p.B1 = Matrix(1, 2);
  p.B1 << b, 0.0;
  p.C0 = scalar(1.0);
  p.C2 = scalar(c);
  p.D21 = Matrix(1, 2);
  p.D21 << 0.0, 1.0;
  const auto aug = rfls::augment_with_delay(p, rfls::identity_delay(1));
  return rfls::build_compact(aug, p);
}

}  // namespace

TEST(Multipliers, PrintedStructure) {
  const auto cp = paper_compact();
  const auto mp = syn::assemble_multipliers(cp, tabulated().lambda);
  Matrix m(3, 3);
  const auto& l = tabulated().lambda;
  m << l(0), 0, 0, 0, l(1) + l(2), -l(1), 0, -l(1), l(1) + l(3);
  EXPECT_LE((mp.M - m).norm(), 1e-15);
}

TEST(Multipliers, OneHotGivesTheBasisBlock) {
  const auto cp = paper_compact();
  const auto base = syn::assemble_multipliers(cp, lam(1, 1, 1, 1));
  for (int j = 0; j < 4; ++j) {
    Vector e = Vector::Zero(4);
    e(j) = 1.0;
    const auto mp = syn::assemble_multipliers(cp, e);
    EXPECT_EQ(mp.M, base.Mi[j]);
    EXPECT_EQ(mp.N, base.Ni[j]);
  }
  EXPECT_THROW(syn::assemble_multipliers(cp, Vector::Ones(3)), rfls::ConfigError);
}

TEST(Feasibility, PrintedExamples) {
  const auto cp = paper_compact();
  EXPECT_TRUE(syn::feasible(tabulated(), cp).feasible);
  EXPECT_FALSE(syn::feasible({ref::tau, lam(1, 1, 1, 1)}, cp).feasible);
  EXPECT_FALSE(syn::feasible({ref::tau, lam(1, 0, 0, 0)}, cp).feasible);
  EXPECT_FALSE(syn::feasible({ref::tau, lam(0.5, 0.2, 0.0, 0.3)}, cp).feasible);
}

TEST(Feasibility, BoundaryPointsCount) {
  const auto cp = paper_compact();
  // (1 - 0.2 - 0.6)(1 - 0.2 - 0.6) - 0.2² = 0 exactly.
  EXPECT_TRUE(syn::feasible({ref::tau, lam(1.0, 0.2, 0.6, 0.6)}, cp).feasible);
  EXPECT_FALSE(syn::feasible({ref::tau, lam(1.0, 0.2, 0.61, 0.6)}, cp).feasible);
  EXPECT_FALSE(syn::feasible({ref::tau, lam(1.01, 0.2, 0.3, 0.3)}, cp).feasible);
}

TEST(Feasibility, AgreesWithClosedFormOnACoarseGrid) {
  const auto cp = paper_compact();
  int disagreements = 0;
  for (int a1 : {25, 100, 125})
    for (int a2 = 5; a2 <= 100; a2 += 5)
      for (int a3 = 5; a3 <= 100; a3 += 5)
        for (int a4 : {5, 30, 55, 95}) {
          const bool want = rfls::oracle::feasible_hundredths(a1, a2, a3, a4);
          const bool got =
              syn::feasible({ref::tau, lam(a1 / 100.0, a2 / 100.0, a3 / 100.0, a4 / 100.0)}, cp)
                  .feasible;
          disagreements += want != got;
        }
  EXPECT_EQ(disagreements, 0);
}

TEST(FilterRiccati, ScalarNominalMatchesQuadraticFormula) {
  const double a = 2.0, b = 1.5, c = 3.0, tau = 10.0;
  const auto cp = scalar_nominal(a, b, c);
  ASSERT_EQ(cp.ktilde(), 0);
  const syn::ScalingPoint p{tau, Vector()};
  const auto y = syn::filter_riccati(cp, p);
  // -2a Y - (c² - 1/τ) Y² + b² = 0
  EXPECT_NEAR(y.value(0, 0), rfls::oracle::scalar_care(-a, -(c * c - 1.0 / tau), b * b), 1e-12);
}

TEST(ControlRiccati, ZeroConstantTermGivesZero) {
  const auto cp = scalar_nominal(2.0, 1.5, 3.0);
  const auto x = syn::control_riccati(cp, {10.0, Vector()});
  EXPECT_NEAR(x.value(0, 0), 0.0, 1e-14);
}

TEST(Synthesis, ScalarNominalDecoupledDesign) {
  const double a = 2.0, b = 1.5, c = 3.0, tau = 10.0;
  const auto cp = scalar_nominal(a, b, c);
  const auto s = syn::synthesize(cp, {tau, Vector()});
  const double y = s.Y(0, 0);
  // X = 0, so K = I, C_c = C_w, B_c = Y C2ᵀ E⁻¹ and V = ½ Y.
  EXPECT_NEAR(s.Cc_tilde(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s.Bc_tilde(0, 0), y * c, 1e-12);
  EXPECT_NEAR(s.Vtau, 0.5 * y, 1e-12);
  EXPECT_NEAR(s.rhoYX, 0.0, 1e-14);
}

TEST(Synthesis, NominalOptimizerSearchesTauOnly) {
  const auto cp = scalar_nominal(2.0, 1.5, 3.0);
  syn::OptimizerOptions oo;
  oo.starts = 2;
  oo.threads = 1;
  oo.tau_min = 1e-2;
  oo.tau_max = 1e3;
  const auto r = syn::minimize_bound(cp, {1.0, Vector()}, oo);
  // V = ½ Y decreases as τ̄ grows, so the upper end wins.
  EXPECT_NEAR(r.best.point.tau, 1e3, 1e-6 * 1e3);
  EXPECT_LE(r.best.Vtau, syn::bound_or_inf(cp, {1.0, Vector()}));
}

TEST(Synthesis, TabulatedPointHasNoControlRiccatiSolution) {
  const auto cp = paper_compact();
  const auto p = tabulated();
  const auto t = syn::scaled_terms(cp, p);
  // The phase block decouples into s x² + 2 a x + q = 0.
  const Matrix s = cp.Btilde1 * t.Minv * cp.Btilde1.transpose() / p.tau;
  const Matrix q = t.R - t.Gamma * t.G.llt().solve(t.Gamma.transpose());
  const double a = cp.Ap(0, 0);
  EXPECT_GT(s(0, 0) * q(0, 0), a * a);
  EXPECT_THROW(syn::control_riccati(cp, p, t), rfls::NoStabilizingSolution);
  EXPECT_THROW(syn::synthesize(cp, p), rfls::InfeasibleError);
  EXPECT_TRUE(std::isinf(syn::bound_or_inf(cp, p)));
}

TEST(Synthesis, FilterGainAtTabulatedPointMatchesPrintedMatrix) {
  const auto cp = paper_compact();
  const auto p = tabulated();
  const auto y = syn::filter_riccati(cp, p);
  EXPECT_GT(rfls::numkernel::min_symmetric_eigenvalue(y.value), 0.0);
  // B̃c depends on Y only.
  const auto s = syn::compute_gains(cp, p, y.value, Matrix::Zero(3, 3));
  const Matrix printed = ref::estimator_input();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 2; ++c) {
      EXPECT_NEAR(s.Bc_tilde(r, c) / printed(r, c), 1.0, 0.05) << r << "," << c;
    }
  }
}

TEST(Synthesis, DesignPointSatisfiesEveryCondition) {
  const auto cp = balanced_compact();
  const auto s = syn::synthesize(cp, design_point());
  EXPECT_GT(rfls::numkernel::min_symmetric_eigenvalue(s.Y), 0.0);
  EXPECT_GE(rfls::numkernel::min_symmetric_eigenvalue(s.X), -1e-10 * s.X.norm());
  EXPECT_LT(s.rhoYX, s.point.tau);
  EXPECT_LE(s.scaled_residual_Y, 1e-8);
  EXPECT_LE(s.scaled_residual_X, 1e-8);
  EXPECT_GE(s.Vtau, 0.0);
  EXPECT_NEAR(s.Vtau, syn::cost_bound(cp, s.point, s.Y, s.X), 1e-12 * s.Vtau);
  // Recomputing B̃c from Y by hand.
  const auto t = syn::scaled_terms(cp, s.point);
  const Matrix bc = (s.Y * cp.Ctilde2.transpose() + t.cross) * t.Einv;
  EXPECT_LE((bc - s.Bc_tilde).norm(), 1e-9 * bc.norm());
}

TEST(Synthesis, RealizationDoesNotChangeTheBound) {
  auto cfg = rfls::config::default_config();
  cfg.delay.realization = rfls::config::RealizationKind::companion;
  const auto comp = rfls::config::build_model(cfg).compact;
  const double v1 = syn::synthesize(balanced_compact(), design_point()).Vtau;
  const double v2 = syn::synthesize(comp, design_point()).Vtau;
  EXPECT_NEAR(v1, v2, 1e-6 * v1);
}

TEST(Synthesis, CouplingViolationCarriesRhoAndTau) {
  const auto cp = balanced_compact();
  const auto s = syn::synthesize(cp, design_point());
  try {
    syn::compute_gains(cp, design_point(), s.Y, s.X * 1e9);
    FAIL() << "expected CouplingViolation";
  } catch (const rfls::CouplingViolation& e) {
    EXPECT_GE(e.rho(), e.tau());
    EXPECT_EQ(e.tau(), design_point().tau);
  }
}

TEST(Synthesis, PointValidation) {
  const auto cp = balanced_compact();
  EXPECT_THROW(syn::synthesize(cp, {1e-6, Vector::Ones(3)}), rfls::ConfigError);
  EXPECT_THROW(syn::synthesize(cp, {-1.0, design_point().lambda}), rfls::DomainError);
  EXPECT_THROW(syn::synthesize(cp, {1e-6, lam(1, 1, 1, 1)}), rfls::InfeasibleError);
}

TEST(Optimizer, ReachesTheBoundTargetAndIsDeterministic) {
  const auto cp = balanced_compact();
  syn::OptimizerOptions oo;
  oo.starts = 2;
  oo.threads = 1;
  const auto a = syn::minimize_bound(cp, tabulated(), oo);
  EXPECT_LE(a.best.Vtau, 0.16);
  oo.threads = 2;
  const auto b = syn::minimize_bound(cp, tabulated(), oo);
  EXPECT_EQ(a.best.Vtau, b.best.Vtau);
  EXPECT_EQ(a.best.point.lambda, b.best.point.lambda);
  EXPECT_FALSE(a.trace.empty());
}

TEST(Optimizer, RestartFromOptimumDoesNotImprove) {
  const auto cp = balanced_compact();
  syn::OptimizerOptions oo;
  oo.starts = 1;
  oo.threads = 1;
  const auto a = syn::minimize_bound(cp, tabulated(), oo);
  const auto b = syn::minimize_bound(cp, a.best.point, oo);
  EXPECT_GE(b.best.Vtau, a.best.Vtau * (1 - 1e-6));
}

TEST(Optimizer, InfeasibleBoxThrows) {
  const auto cp = balanced_compact();
  syn::OptimizerOptions oo;
  oo.starts = 2;
  oo.threads = 1;
  oo.lambda_lo = Vector::Constant(4, 2.0);
  oo.lambda_hi = Vector::Constant(4, 3.0);
  EXPECT_THROW(syn::minimize_bound(cp, tabulated(), oo), rfls::InfeasibleError);
}
