#include "rfls/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "rfls/errors.hpp"
#include "rfls/numkernel.hpp"

namespace rfls {
namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void expect_shape(std::vector<std::string>& out, const std::string& name, const Matrix& m,
                  Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    out.push_back(name + " has shape " + dims(m) + ", expected " + std::to_string(rows) + "x" +
                  std::to_string(cols));
  }
}

Matrix pad_rows(const Matrix& top, Eigen::Index extra) {
  Matrix out = Matrix::Zero(top.rows() + extra, top.cols());
  out.topRows(top.rows()) = top;
  return out;
}

Matrix pad_cols(const Matrix& left, Eigen::Index extra) {
  Matrix out = Matrix::Zero(left.rows(), left.cols() + extra);
  out.leftCols(left.cols()) = left;
  return out;
}

}  // namespace

Eigen::Index UncertainPlant::h() const {
  Eigen::Index s = 0;
  for (const auto& c : C1s) s += c.rows();
  return s;
}

Eigen::Index UncertainPlant::r() const {
  Eigen::Index s = 0;
  for (const auto& b : B1s) s += b.cols();
  return s;
}

Eigen::Index CompactPlant::h() const {
  return std::accumulate(channel_h.begin(), channel_h.end(), Eigen::Index{0});
}

Eigen::Index CompactPlant::r() const {
  return std::accumulate(channel_r.begin(), channel_r.end(), Eigen::Index{0});
}

std::vector<std::string> validate_plant(const UncertainPlant& p) {
  std::vector<std::string> v;
  const Eigen::Index n = p.A.rows();
  if (p.A.cols() != n) v.push_back("A must be square, got " + dims(p.A));
  const Eigen::Index q = p.B1.cols();
  const Eigen::Index l = p.C2.rows();
  const Eigen::Index g = p.g();
  const Eigen::Index k = p.k();

  expect_shape(v, "B1", p.B1, n, q);
  if (p.C0.cols() != n) v.push_back("C0 has " + std::to_string(p.C0.cols()) + " columns, expected " + std::to_string(n));
  expect_shape(v, "C2", p.C2, l, n);
  expect_shape(v, "D21", p.D21, l, q);

  if (static_cast<Eigen::Index>(p.Bbar1.size()) != g) v.push_back("Bbar1 count does not match g = " + std::to_string(g));
  if (static_cast<Eigen::Index>(p.Cbar1.size()) != g) v.push_back("Cbar1 count does not match g = " + std::to_string(g));
  if (static_cast<Eigen::Index>(p.Dbar21.size()) != g) v.push_back("Dbar21 count does not match g = " + std::to_string(g));
  for (std::size_t i = 0; i < p.Bbar1.size(); ++i) expect_shape(v, "Bbar1_" + std::to_string(i + 1), p.Bbar1[i], n, 1);
  for (std::size_t i = 0; i < p.Cbar1.size(); ++i) expect_shape(v, "Cbar1_" + std::to_string(i + 1), p.Cbar1[i], 1, n);
  for (std::size_t i = 0; i < p.Dbar21.size(); ++i) expect_shape(v, "Dbar21_" + std::to_string(i + 1), p.Dbar21[i], l, 1);
  for (std::size_t i = 0; i < p.beta.size(); ++i) {
    if (!(p.beta[i] > 0.0)) v.push_back("beta_" + std::to_string(i + 1) + " must be positive");
  }

  if (static_cast<Eigen::Index>(p.C1s.size()) != k) v.push_back("C1s count does not match k = " + std::to_string(k));
  if (static_cast<Eigen::Index>(p.D21s.size()) != k) v.push_back("D21s count does not match k = " + std::to_string(k));
  if (static_cast<Eigen::Index>(p.S.size()) != k) v.push_back("S count does not match k = " + std::to_string(k));
  for (Eigen::Index s = 0; s < k; ++s) {
    const auto tag = std::to_string(s + 1);
    if (p.B1s[s].rows() != n) v.push_back("B1_" + tag + " has " + std::to_string(p.B1s[s].rows()) + " rows, expected " + std::to_string(n));
    if (s < static_cast<Eigen::Index>(p.C1s.size()) && p.C1s[s].cols() != n) {
      v.push_back("C1_" + tag + " has " + std::to_string(p.C1s[s].cols()) + " columns, expected " + std::to_string(n));
    }
    if (s < static_cast<Eigen::Index>(p.D21s.size())) expect_shape(v, "D21_" + tag, p.D21s[s], l, p.B1s[s].cols());
    if (s < static_cast<Eigen::Index>(p.S.size())) {
      const Matrix& sm = p.S[s];
      if (sm.rows() != n || sm.cols() != n) {
        expect_shape(v, "S_" + tag, sm, n, n);
      } else if ((sm - sm.transpose()).norm() > 1e-12 * std::max(1.0, sm.norm())) {
        v.push_back("S_" + tag + " not symmetric");
      } else if (!(numkernel::min_symmetric_eigenvalue(sm) > 0.0)) {
        v.push_back("S_" + tag + " not positive definite");
      }
    }
  }
  return v;
}

std::vector<std::string> check_nonlinearity_bank(const NonlinearityBank& bank, double range,
                                                 int grid_points, double tol) {
  std::vector<std::string> v;
  grid_points = std::max(grid_points, 2);
  for (const auto& nl : bank) {
    if (nl.psi(0.0) != 0.0) v.push_back(nl.name + ": psi(0) != 0");
    double worst = 0.0;
    for (int i = 0; i < grid_points; ++i) {
      const double a = -range + 2.0 * range * i / (grid_points - 1);
      const double fa = nl.psi(a);
      for (int j = i + 1; j < grid_points; ++j) {
        const double b = -range + 2.0 * range * j / (grid_points - 1);
        const double excess = std::abs(fa - nl.psi(b)) - nl.beta * std::abs(a - b);
        worst = std::max(worst, excess);
      }
    }
    if (worst > tol) {
      std::ostringstream os;
      os << nl.name << ": Lipschitz bound " << nl.beta << " exceeded by " << worst;
      v.push_back(os.str());
    }
  }
  return v;
}

AugmentedPlant augment_with_delay(const UncertainPlant& plant, const DelayModel& delay) {
  const Eigen::Index nbar = plant.nbar();
  const Eigen::Index na = delay.states();
  const Eigen::Index m = plant.m();
  if (delay.Ga.cols() != m || delay.Ja.rows() != m || delay.Ja.cols() != m ||
      delay.Ha.rows() != m) {
    throw ConfigError("delay model has " + std::to_string(delay.Ga.cols()) +
                      " input channels but C0 has " + std::to_string(m) + " rows");
  }
  if (delay.Ga.rows() != na || delay.Ha.cols() != na) {
    throw ConfigError("delay model matrices are inconsistent with Fa");
  }

  AugmentedPlant a;
  a.nbar = nbar;
  a.na = na;
  const Eigen::Index n = nbar + na;
  a.Ap = Matrix::Zero(n, n);
  a.Ap.topLeftCorner(nbar, nbar) = plant.A;
  a.Ap.bottomLeftCorner(na, nbar) = delay.Ga * plant.C0;
  a.Ap.bottomRightCorner(na, na) = delay.Fa;

  a.Bp1 = pad_rows(plant.B1, na);
  for (const auto& b : plant.Bbar1) a.Bbar_p1.push_back(pad_rows(b, na));
  for (const auto& b : plant.B1s) a.Bp1s.push_back(pad_rows(b, na));
  a.Cp0 = pad_cols(plant.C0, na);
  for (const auto& c : plant.C1s) a.Cp1s.push_back(pad_cols(c, na));
  for (const auto& c : plant.Cbar1) a.Cbar_p1.push_back(pad_cols(c, na));
  a.Cp2 = pad_cols(plant.C2, na);
  a.D21 = plant.D21;
  a.D21s = plant.D21s;
  a.Dbar21 = plant.Dbar21;

  a.Ca = Matrix(m, n);
  a.Ca << delay.Ja * plant.C0, delay.Ha;
  return a;
}

CompactPlant build_compact(const AugmentedPlant& aug, const UncertainPlant& plant,
                           const Matrix& J21_in, const CompactOptions& opts) {
  if (const auto issues = validate_plant(plant); !issues.empty()) {
    throw ConfigError("plant is malformed: " + issues.front());
  }
  const Eigen::Index n = aug.n();
  const Eigen::Index g = plant.g();
  const Eigen::Index k = plant.k();
  const Eigen::Index m = plant.m();
  const Eigen::Index l = plant.l();
  const Eigen::Index q = plant.q();
  const Eigen::Index h = plant.h();
  const Eigen::Index r = plant.r();
  const Eigen::Index p = h + 2 * g;

  const Matrix J21 = J21_in.size() == 0 ? Matrix(Matrix::Identity(g, g)) : J21_in;
  if (J21.rows() != g || J21.cols() != g) {
    throw ConfigError("J21 must be " + std::to_string(g) + "x" + std::to_string(g));
  }
  if (g > 0 && ((J21 - J21.transpose()).norm() > 1e-12 * std::max(1.0, J21.norm()) ||
                !(numkernel::min_symmetric_eigenvalue(J21) > 0.0))) {
    throw ConfigError("J21 must be symmetric positive definite");
  }

  CompactPlant cp;
  cp.Ap = aug.Ap;
  cp.Bp1 = pad_cols(aug.Bp1, g);
  cp.Cp0 = aug.Cp0;
  cp.Ca = aug.Ca;
  cp.nbar = aug.nbar;
  cp.na = aug.na;
  cp.m = m;
  cp.l = l;
  cp.q = q;
  cp.beta = plant.beta;
  for (Eigen::Index s = 0; s < k; ++s) {
    cp.channel_h.push_back(plant.C1s[s].rows());
    cp.channel_r.push_back(plant.B1s[s].cols());
  }

  // ξ̃ = [ξ₁..ξₖ, μ₁..μ_g, μ̃₁..μ̃_g]
  cp.Btilde1 = Matrix::Zero(n, r + 2 * g);
  cp.Dtilde21 = Matrix::Zero(l + g, r + 2 * g);
  Eigen::Index col = 0;
  for (Eigen::Index s = 0; s < k; ++s) {
    const Eigen::Index rs = cp.channel_r[s];
    cp.Btilde1.middleCols(col, rs) = aug.Bp1s[s];
    cp.Dtilde21.block(0, col, l, rs) = aug.D21s[s];
    col += rs;
  }
  for (Eigen::Index i = 0; i < g; ++i) {
    cp.Btilde1.col(r + i) = aug.Bbar_p1[i];
    cp.Dtilde21.block(0, r + i, l, 1) = aug.Dbar21[i];
  }
  if (g > 0) cp.Dtilde21.bottomRightCorner(g, g).setIdentity();

  // ζ̃ = [ζ₁..ζₖ, ν₁..ν_g, ν̃₁..ν̃_g]; the ν̃ rows come from ũ through D̃12.
  cp.Ctilde1 = Matrix::Zero(p, n);
  Eigen::Index row = 0;
  for (Eigen::Index s = 0; s < k; ++s) {
    const Eigen::Index hs = cp.channel_h[s];
    cp.Ctilde1.middleRows(row, hs) = aug.Cp1s[s];
    row += hs;
  }
  for (Eigen::Index i = 0; i < g; ++i) cp.Ctilde1.row(h + i) = aug.Cbar_p1[i];
  cp.Dtilde12 = Matrix::Zero(p, m + g);
  if (g > 0) cp.Dtilde12.bottomRightCorner(g, g).setIdentity();

  cp.Ctilde2 = Matrix::Zero(l + g, n);
  cp.Ctilde2.topRows(l) = aug.Cp2;

  cp.Dbar21 = Matrix::Zero(l + g, q + g);
  cp.Dbar21.topLeftCorner(l, q) = aug.D21;
  if (g > 0) cp.Dbar21.bottomRightCorner(g, g) = J21;
  cp.J21 = J21;

  // [Bp1; D̄21] = [B̃1; D̃21] J
  Matrix lhs(n + l + g, r + 2 * g);
  lhs << cp.Btilde1, cp.Dtilde21;
  Matrix rhs(n + l + g, q + g);
  rhs << cp.Bp1, cp.Dbar21;
  const double rhs_scale = std::max(1.0, rhs.norm());
  bool have_j = false;
  if (r + 2 * g == 0) {
    // No uncertainty channels: the compact form is the nominal plant and the
    // stacking identity is reported but cannot be enforced.
    cp.J = Matrix::Zero(0, q + g);
    cp.assumption1_residual = rhs.norm() / rhs_scale;
    have_j = true;
  } else if (r + 2 * g == q + g) {
    const Matrix eye = Matrix::Identity(q + g, q + g);
    const double res = (rhs - lhs * eye).norm() / rhs_scale;
    if (res <= opts.j_tolerance) {
      cp.J = eye;
      cp.assumption1_residual = res;
      have_j = true;
    }
  }
  if (!have_j) {
    cp.J = lhs.completeOrthogonalDecomposition().solve(rhs);
    cp.assumption1_residual = (rhs - lhs * cp.J).norm() / rhs_scale;
    if (!(cp.assumption1_residual <= opts.j_tolerance)) {
      std::ostringstream os;
      os << "no J satisfies [Bp1; Dbar21] = [Btilde1; Dtilde21] J (least-squares residual "
         << cp.assumption1_residual << ")";
      throw ConfigError(os.str());
    }
  }

  cp.d0 = l + g == 0 ? 0.0 : numkernel::min_symmetric_eigenvalue(cp.Dbar21 * cp.Dbar21.transpose());
  if (!(cp.d0 >= opts.d0) || !(cp.d0 > 0.0)) {
    std::ostringstream os;
    os << "Dbar21 Dbar21^T is not bounded below by d0 = " << opts.d0
       << " (smallest eigenvalue " << cp.d0 << "); the measurement noise channel is singular";
    throw ConfigError(os.str());
  }
  return cp;
}

CompactPlant transform_state(const CompactPlant& cp, const Matrix& t) {
  const Matrix tinv = t.inverse();
  CompactPlant out = cp;
  out.Ap = tinv * cp.Ap * t;
  out.Bp1 = tinv * cp.Bp1;
  out.Btilde1 = tinv * cp.Btilde1;
  out.Cp0 = cp.Cp0 * t;
  out.Ca = cp.Ca * t;
  out.Ctilde1 = cp.Ctilde1 * t;
  out.Ctilde2 = cp.Ctilde2 * t;
  return out;
}

}  // namespace rfls
