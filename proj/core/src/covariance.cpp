#include "rfls/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfls/errors.hpp"
#include "rfls/numkernel.hpp"

namespace rfls::covariance {

Matrix structured_delta(const CompactPlant& cp, double delta1, double delta2) {
  const Eigen::Index g = cp.g();
  Matrix d = Matrix::Zero(cp.r() + 2 * g, cp.h() + 2 * g);
  Eigen::Index roff = 0, hoff = 0;
  for (Eigen::Index s = 0; s < cp.k(); ++s) {
    const Eigen::Index w = std::min(cp.channel_r[s], cp.channel_h[s]);
    d.block(roff, hoff, w, w).setIdentity();
    d.block(roff, hoff, w, w) *= delta1;
    roff += cp.channel_r[s];
    hoff += cp.channel_h[s];
  }
  for (Eigen::Index i = 0; i < 2 * g; ++i) d(cp.r() + i, cp.h() + i) = delta2;
  return d;
}

ClosedLoopModel build_closed_loop(const CompactPlant& cp,
                                  const synthesis::SynthesisSolution& sol, const Matrix& Delta,
                                  NoiseModel noise) {
  const Eigen::Index n = cp.n();
  if (Delta.rows() != cp.Btilde1.cols() || Delta.cols() != cp.Ctilde1.rows()) {
    throw ConfigError("Delta must be (r+2g)x(h+2g)");
  }
  if (sol.Ac.rows() != n || sol.Bc_tilde.cols() != cp.Ctilde2.rows() ||
      sol.Cc_tilde.rows() != cp.Dtilde12.cols()) {
    throw ConfigError("estimator gains do not match the compact plant dimensions");
  }
  if (Delta.size() > 0) {
    const double norm = Delta.jacobiSvd().singularValues()(0);
    if (norm > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "uncertainty Delta has norm " << norm << " > 1";
      throw DomainError(os.str());
    }
  }

  ClosedLoopModel loop;
  loop.n = n;
  loop.Delta = Delta;
  const Matrix& B1 = cp.Btilde1;
  const Matrix& Bc = sol.Bc_tilde;
  const Matrix& Cc = sol.Cc_tilde;
  loop.Abold.resize(2 * n, 2 * n);
  loop.Abold.topLeftCorner(n, n) = cp.Ap + B1 * Delta * cp.Ctilde1;
  loop.Abold.topRightCorner(n, n) = B1 * Delta * cp.Dtilde12 * Cc;
  loop.Abold.bottomLeftCorner(n, n) =
      Bc * cp.Ctilde2 + Bc * cp.Dtilde21 * Delta * cp.Ctilde1;
  loop.Abold.bottomRightCorner(n, n) = sol.Ac + Bc * cp.Dtilde21 * Delta * cp.Dtilde12 * Cc;

  Matrix dbar = cp.Dbar21;
  if (noise == NoiseModel::physical) {
    dbar.bottomRightCorner(cp.g(), cp.g()).setZero();
  }
  loop.Bbold.resize(2 * n, cp.Bp1.cols());
  loop.Bbold.topRows(n) = cp.Bp1;
  loop.Bbold.bottomRows(n) = Bc * dbar;

  const Eigen::Index m = cp.m;
  loop.L0 = Matrix::Zero(m, 2 * n);
  loop.L0.leftCols(n) = cp.Cp0;
  loop.La = Matrix::Zero(cp.Ca.rows(), 2 * n);
  loop.La.rightCols(n) = cp.Ca;
  loop.Lf = Matrix::Zero(m, 2 * n);
  loop.Lf.rightCols(n) = Cc.topRows(m);
  return loop;
}

CovarianceReport smoothed_error_covariance(const ClosedLoopModel& loop, const Matrix& Cp0_row,
                                           const Matrix& Ca_row, double delta) {
  const Eigen::Index n = loop.n;
  if (!(delta >= 0.0)) throw DomainError("smoothing lag must be nonnegative");
  if (Cp0_row.cols() != n || Ca_row.cols() != n || Cp0_row.rows() != Ca_row.rows()) {
    throw ConfigError("output selectors must be m x n with matching rows");
  }
  const auto lyap = numkernel::solve_lyapunov(loop.Abold, loop.Bbold * loop.Bbold.transpose());

  CovarianceReport rep;
  rep.P = symmetrize(lyap.P);
  rep.lyapunov_residual = lyap.residual;
  rep.Phi = numkernel::expm(loop.Abold, delta);

  Matrix l0 = Matrix::Zero(Cp0_row.rows(), 2 * n);
  l0.leftCols(n) = Cp0_row;
  Matrix la = Matrix::Zero(Ca_row.rows(), 2 * n);
  la.rightCols(n) = Ca_row;
  const Matrix cross = la * rep.Phi * rep.P * l0.transpose();
  rep.Psa = symmetrize(l0 * rep.P * l0.transpose() - cross - cross.transpose() +
                       la * rep.P * la.transpose());
  const Matrix ef = loop.Lf - l0;
  rep.Pf = symmetrize(ef * rep.P * ef.transpose());
  rep.delta2 = loop.Delta.size() > 0 ? loop.Delta(loop.Delta.rows() - 1, loop.Delta.cols() - 1)
                                     : 0.0;
  return rep;
}

CovarianceReport smoothed_error_covariance(const ClosedLoopModel& loop, double delta) {
  return smoothed_error_covariance(loop, loop.L0.leftCols(loop.n), loop.La.rightCols(loop.n),
                                   delta);
}

std::vector<SweepRow> delta_sweep(const CompactPlant& cp,
                                  const synthesis::SynthesisSolution& sol,
                                  const std::vector<double>& grid, double delta,
                                  NoiseModel noise, double delta1) {
  std::vector<double> points = grid;
  for (double& d : points) {
    if (d == 0.0) d = 0.0;  // drop the sign of -0
    if (!(d >= -1.0 && d <= 0.0)) {
      std::ostringstream os;
      os << "sweep point " << d << " lies outside [-1, 0]";
      throw DomainError(os.str());
    }
  }
  std::sort(points.begin(), points.end(), std::greater<>());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  std::vector<SweepRow> rows;
  rows.reserve(points.size());
  for (double d2 : points) {
    const auto loop = build_closed_loop(cp, sol, structured_delta(cp, delta1, d2), noise);
    SweepRow row;
    row.delta2 = d2;
    row.abscissa = numkernel::spectral_abscissa(loop.Abold);
    row.hurwitz = row.abscissa < 0.0;
    if (row.hurwitz) {
      const auto rep = smoothed_error_covariance(loop, delta);
      row.psa = rep.Psa(0, 0);
      row.pf = rep.Pf(0, 0);
    } else {
      row.psa = row.pf = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> uniform_grid(int points) {
  if (points < 1) throw ConfigError("sweep grid needs at least one point");
  std::vector<double> g(points);
  if (points == 1) {
    g[0] = 0.0;
    return g;
  }
  for (int i = 1; i < points; ++i) g[i] = -static_cast<double>(i) / (points - 1);
  return g;
}

}  // namespace rfls::covariance
