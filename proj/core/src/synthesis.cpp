#include "rfls/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfls/errors.hpp"
#include "rfls/numkernel.hpp"

namespace rfls::synthesis {
namespace {

constexpr double kFeasibilityTolerance = 1e-12;

Matrix gram_rows(const Matrix& m) { return m.transpose() * m; }

Matrix block_selector(Eigen::Index count, Eigen::Index offset, Eigen::Index width) {
  Matrix s = Matrix::Zero(count, width);
  for (Eigen::Index i = 0; i < count; ++i) s(i, offset + i) = 1.0;
  return s;
}

Matrix unit_row(Eigen::Index width, Eigen::Index at) {
  Matrix e = Matrix::Zero(1, width);
  e(0, at) = 1.0;
  return e;
}

const Matrix& target_row(const CompactPlant& cp, TargetOutput target) {
  return target == TargetOutput::delayed ? cp.Ca : cp.Cp0;
}

void check_point(const CompactPlant& cp, const ScalingPoint& point) {
  if (point.lambda.size() != cp.ktilde()) {
    throw ConfigError("lambda has " + std::to_string(point.lambda.size()) +
                      " entries, expected k + 3g = " + std::to_string(cp.ktilde()));
  }
  if (!(point.tau > 0.0) || !std::isfinite(point.tau)) {
    throw DomainError("tau must be positive and finite");
  }
}

std::string describe(const ScalingPoint& p) {
  std::ostringstream os;
  os.precision(6);
  os << "tau=" << p.tau << " lambda=[";
  for (Eigen::Index i = 0; i < p.lambda.size(); ++i) os << (i ? ", " : "") << p.lambda(i);
  os << "]";
  return os.str();
}

}  // namespace

MultiplierPair assemble_multipliers(const CompactPlant& cp, const Vector& lambda) {
  const Eigen::Index g = cp.g();
  const Eigen::Index k = cp.k();
  const Eigen::Index h = cp.h();
  const Eigen::Index r = cp.r();
  const Eigen::Index xi = r + 2 * g;
  const Eigen::Index zeta = h + 2 * g;
  if (lambda.size() != k + 3 * g) {
    throw ConfigError("lambda has " + std::to_string(lambda.size()) +
                      " entries, expected k + 3g = " + std::to_string(k + 3 * g));
  }

  MultiplierPair mp;
  Eigen::Index roff = 0, hoff = 0;
  for (Eigen::Index s = 0; s < k; ++s) {
    mp.Mi.push_back(gram_rows(block_selector(cp.channel_r[s], roff, xi)));
    mp.Ni.push_back(gram_rows(block_selector(cp.channel_h[s], hoff, zeta)));
    roff += cp.channel_r[s];
    hoff += cp.channel_h[s];
  }
  for (Eigen::Index i = 0; i < g; ++i) {  // (μ - μ̃)² <= β²(ν - ν̃)²
    const Matrix m = unit_row(xi, r + i) - unit_row(xi, r + g + i);
    const Matrix n = cp.beta[i] * (unit_row(zeta, h + i) - unit_row(zeta, h + g + i));
    mp.Mi.push_back(gram_rows(m));
    mp.Ni.push_back(gram_rows(n));
  }
  for (Eigen::Index i = 0; i < g; ++i) {  // μ² <= β²ν²
    mp.Mi.push_back(gram_rows(unit_row(xi, r + i)));
    mp.Ni.push_back(gram_rows(cp.beta[i] * unit_row(zeta, h + i)));
  }
  for (Eigen::Index i = 0; i < g; ++i) {  // μ̃² <= β²ν̃²
    mp.Mi.push_back(gram_rows(unit_row(xi, r + g + i)));
    mp.Ni.push_back(gram_rows(cp.beta[i] * unit_row(zeta, h + g + i)));
  }

  mp.M = Matrix::Zero(xi, xi);
  mp.N = Matrix::Zero(zeta, zeta);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    mp.M += lambda(i) * mp.Mi[i];
    mp.N += lambda(i) * mp.Ni[i];
  }
  return mp;
}

Feasibility feasible(const ScalingPoint& point, const CompactPlant& cp) {
  Feasibility f;
  f.margin = -std::numeric_limits<double>::infinity();
  if (point.lambda.size() != cp.ktilde()) return f;
  for (Eigen::Index i = 0; i < point.lambda.size(); ++i) {
    if (!(point.lambda(i) > 0.0) || !std::isfinite(point.lambda(i))) return f;
  }
  const auto mp = assemble_multipliers(cp, point.lambda);
  if (mp.M.size() == 0) {
    f.feasible = true;
    f.margin = std::numeric_limits<double>::infinity();
    return f;
  }
  if (!(numkernel::min_symmetric_eigenvalue(mp.M) > 0.0)) return f;
  const Matrix minv = symmetrize(mp.M.llt().solve(Matrix::Identity(mp.M.rows(), mp.M.cols())));
  f.margin = numkernel::min_symmetric_eigenvalue(minv - cp.J * cp.J.transpose());
  // Points on the boundary of M⁻¹ ⪰ JJᵀ count as feasible despite rounding.
  const double scale = std::max(1.0, minv.cwiseAbs().rowwise().sum().maxCoeff());
  f.feasible = f.margin >= -kFeasibilityTolerance * scale;
  return f;
}

ScaledTerms scaled_terms(const CompactPlant& cp, const ScalingPoint& point,
                         const SynthesisOptions& opts) {
  check_point(cp, point);
  ScaledTerms t;
  t.mult = assemble_multipliers(cp, point.lambda);
  const Eigen::Index xi = t.mult.M.rows();
  if (xi > 0) {
    if (!(numkernel::min_symmetric_eigenvalue(t.mult.M) > 0.0)) {
      throw InfeasibleError("M(lambda) is not positive definite at " + describe(point));
    }
    t.Minv = symmetrize(t.mult.M.llt().solve(Matrix::Identity(xi, xi)));
  } else {
    t.Minv = Matrix(0, 0);
  }
  if (cp.Btilde1.cols() == 0) {
    // No uncertainty channels: the noise enters through the nominal channels.
    t.process = symmetrize(cp.Bp1 * cp.Bp1.transpose());
    t.E = symmetrize(cp.Dbar21 * cp.Dbar21.transpose());
    t.cross = cp.Bp1 * cp.Dbar21.transpose();
  } else {
    t.process = symmetrize(cp.Btilde1 * t.Minv * cp.Btilde1.transpose());
    t.E = symmetrize(cp.Dtilde21 * t.Minv * cp.Dtilde21.transpose());
    t.cross = cp.Btilde1 * t.Minv * cp.Dtilde21.transpose();
  }
  if (!(numkernel::min_symmetric_eigenvalue(t.E) > 0.0)) {
    throw InfeasibleError("E_lambda = Dtilde21 M^-1 Dtilde21^T is singular at " + describe(point));
  }
  t.Einv = symmetrize(t.E.llt().solve(Matrix::Identity(t.E.rows(), t.E.cols())));

  const Eigen::Index m = cp.m;
  const Matrix& cw = target_row(cp, opts.target);
  const double tau = point.tau;
  t.R = symmetrize(cw.transpose() * cw + tau * cp.Ctilde1.transpose() * t.mult.N * cp.Ctilde1);
  t.G = tau * cp.Dtilde12.transpose() * t.mult.N * cp.Dtilde12;
  t.G.topLeftCorner(m, m) += Matrix::Identity(m, m);
  t.G = symmetrize(t.G);
  t.Gamma = tau * cp.Ctilde1.transpose() * t.mult.N * cp.Dtilde12;
  t.Gamma.leftCols(m) -= cw.transpose();
  return t;
}

static numkernel::CareSolution solve_named(const numkernel::RiccatiProblem& prob, const char* name,
                                    const ScalingPoint& point) {
  try {
    return numkernel::solve_care(prob);
  } catch (const NoStabilizingSolution& e) {
    throw NoStabilizingSolution(std::string(name) + " Riccati at " + describe(point) + ": " +
                                    e.what(),
                                e.eigenvalues());
  }
}

RiccatiResult filter_riccati(const CompactPlant& cp, const ScalingPoint& point,
                             const SynthesisOptions& opts) {
  return filter_riccati(cp, point, scaled_terms(cp, point, opts), opts);
}

RiccatiResult filter_riccati(const CompactPlant& cp, const ScalingPoint& point,
                             const ScaledTerms& t, const SynthesisOptions& opts) {
  const Matrix shifted = cp.Ap - t.cross * t.Einv * cp.Ctilde2;
  numkernel::RiccatiProblem prob;
  prob.A = shifted.transpose();
  prob.S = -symmetrize(cp.Ctilde2.transpose() * t.Einv * cp.Ctilde2 - t.R / point.tau);
  prob.Q = symmetrize(t.process - t.cross * t.Einv * t.cross.transpose());
  const auto sol = solve_named(prob, "filter", point);

  RiccatiResult out{sol.X, sol.residual, sol.scaled_residual, sol.stabilizing};
  if (!sol.stabilizing) {
    throw NumericalError("filter Riccati solution is not stabilizing at " + describe(point));
  }
  if (!(numkernel::min_symmetric_eigenvalue(sol.X) > 0.0)) {
    throw InfeasibleError("filter Riccati has no positive definite solution at " + describe(point));
  }
  if (!(sol.scaled_residual <= opts.residual_tol)) {
    std::ostringstream os;
    os << "filter Riccati residual " << sol.residual << " exceeds tolerance at " << describe(point);
    throw NumericalError(os.str());
  }
  return out;
}

RiccatiResult control_riccati(const CompactPlant& cp, const ScalingPoint& point,
                              const SynthesisOptions& opts) {
  return control_riccati(cp, point, scaled_terms(cp, point, opts), opts);
}

RiccatiResult control_riccati(const CompactPlant& cp, const ScalingPoint& point,
                              const ScaledTerms& t, const SynthesisOptions& opts) {
  if (!(numkernel::min_symmetric_eigenvalue(t.G) > 0.0)) {
    throw InfeasibleError("G is not positive definite at " + describe(point));
  }
  const Matrix ginv_gt = t.G.llt().solve(t.Gamma.transpose());
  numkernel::RiccatiProblem prob;
  prob.A = cp.Ap;
  prob.S = symmetrize(cp.Btilde1 * t.Minv * cp.Btilde1.transpose() / point.tau);
  prob.Q = symmetrize(t.R - t.Gamma * ginv_gt);
  const auto sol = solve_named(prob, "control", point);

  RiccatiResult out{sol.X, sol.residual, sol.scaled_residual, sol.stabilizing};
  if (!sol.stabilizing) {
    throw NumericalError("control Riccati solution is not stabilizing at " + describe(point));
  }
  const double floor = -opts.psd_tol * std::max(1.0, sol.X.norm());
  if (!(numkernel::min_symmetric_eigenvalue(sol.X) >= floor)) {
    throw InfeasibleError("control Riccati has no nonnegative definite solution at " +
                          describe(point));
  }
  if (!(sol.scaled_residual <= opts.residual_tol)) {
    std::ostringstream os;
    os << "control Riccati residual " << sol.residual << " exceeds tolerance at "
       << describe(point);
    throw NumericalError(os.str());
  }
  return out;
}

namespace {

SynthesisSolution gains_from_terms(const CompactPlant& cp, const ScalingPoint& point,
                                   const ScaledTerms& t, const Matrix& Y, const Matrix& X) {
  const Eigen::Index n = cp.n();
  const double tau = point.tau;
  SynthesisSolution s;
  s.point = point;
  s.Y = Y;
  s.X = X;
  s.nbar = cp.nbar;
  s.na = cp.na;
  s.rhoYX = numkernel::spectral_radius(Y * X);
  if (!(s.rhoYX < tau)) {
    std::ostringstream os;
    os << "coupling condition violated: rho(YX) = " << s.rhoYX << " >= tau = " << tau;
    throw CouplingViolation(os.str(), s.rhoYX, tau);
  }
  const Matrix coupling = Matrix::Identity(n, n) - Y * X / tau;
  const Matrix kinv = coupling.partialPivLu().inverse();
  const Matrix ginv_gt = t.G.llt().solve(t.Gamma.transpose());

  s.Bc_tilde = (Y * cp.Ctilde2.transpose() + t.cross) * t.Einv;
  s.Ac = cp.Ap + Y * t.R / tau - s.Bc_tilde * cp.Ctilde2 - Y * t.Gamma * ginv_gt * kinv / tau;
  s.Cc_tilde = -ginv_gt * kinv;

  const Matrix innov = s.Bc_tilde * t.E * s.Bc_tilde.transpose();
  s.Vtau = 0.5 * (Y * t.R + innov * X * kinv).trace();
  return s;
}

}  // namespace

SynthesisSolution compute_gains(const CompactPlant& cp, const ScalingPoint& point,
                                const Matrix& Y, const Matrix& X,
                                const SynthesisOptions& opts) {
  return gains_from_terms(cp, point, scaled_terms(cp, point, opts), Y, X);
}

double cost_bound(const CompactPlant& cp, const ScalingPoint& point, const Matrix& Y,
                  const Matrix& X, const SynthesisOptions& opts) {
  const auto t = scaled_terms(cp, point, opts);
  const Eigen::Index n = cp.n();
  const double rho = numkernel::spectral_radius(Y * X);
  if (!(rho < point.tau)) {
    std::ostringstream os;
    os << "coupling condition violated: rho(YX) = " << rho << " >= tau = " << point.tau;
    throw CouplingViolation(os.str(), rho, point.tau);
  }
  const Matrix kinv = (Matrix::Identity(n, n) - Y * X / point.tau).partialPivLu().inverse();
  const Matrix left = Y * cp.Ctilde2.transpose() + t.cross;
  const Matrix right = cp.Ctilde2 * Y + t.cross.transpose();
  return 0.5 * (Y * t.R + left * t.Einv * right * X * kinv).trace();
}

SynthesisSolution synthesize(const CompactPlant& cp, const ScalingPoint& point,
                             const SynthesisOptions& opts) {
  check_point(cp, point);
  const auto feas = feasible(point, cp);
  if (!feas.feasible) {
    std::ostringstream os;
    os << "scaling point is not feasible (margin " << feas.margin << ") at " << describe(point);
    throw InfeasibleError(os.str());
  }
  const auto t = scaled_terms(cp, point, opts);
  const auto y = filter_riccati(cp, point, t, opts);
  const auto x = control_riccati(cp, point, t, opts);
  auto s = gains_from_terms(cp, point, t, y.value, x.value);
  s.residual_Y = y.residual;
  s.residual_X = x.residual;
  s.scaled_residual_Y = y.scaled_residual;
  s.scaled_residual_X = x.scaled_residual;
  if (!(s.Vtau >= 0.0) || !std::isfinite(s.Vtau)) {
    throw NumericalError("cost bound is negative or not finite at " + describe(point));
  }
  return s;
}

double bound_or_inf(const CompactPlant& cp, const ScalingPoint& point,
                    const SynthesisOptions& opts) {
  try {
    return synthesize(cp, point, opts).Vtau;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace rfls::synthesis
