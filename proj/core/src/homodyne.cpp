#include "rfls/homodyne.hpp"

#include <cmath>
#include <limits>

#include "rfls/errors.hpp"

namespace rfls::homodyne {

UncertainPlant plant(const Parameters& p) {
  if (!(p.kappa >= 0.0) || !(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.gamma >= 0.0)) {
    throw ConfigError("homodyne parameters need kappa >= 0, alpha > 0, beta > 0, gamma >= 0");
  }
  const double sk = std::sqrt(p.kappa);
  const double meas = 1.0 / (2.0 * p.alpha * p.beta);
  auto scalar = [](double v) { return Matrix::Constant(1, 1, v); };

  UncertainPlant u;
  u.A = scalar(-p.lambda);
  u.B1 = Matrix(1, 2);
  u.B1 << sk, 0.0;
  u.Bbar1 = {scalar(0.0)};
  u.B1s = {scalar(sk)};
  u.C0 = scalar(1.0);
  u.C1s = {scalar(0.0)};
  u.Cbar1 = {scalar(2.0 * p.alpha * p.gamma)};
  u.C2 = scalar(1.0);
  u.D21 = Matrix(1, 2);
  u.D21 << 0.0, meas;
  u.D21s = {scalar(0.0)};
  u.Dbar21 = {scalar(meas)};
  u.beta = {1.0};
  u.S = {scalar(1.0)};
  return u;
}

double estimator_nonlinearity(double nu, const Parameters& p) {
  const double scale = 2.0 * p.alpha * p.gamma;
  if (scale == 0.0) return 0.0;
  const double x = nu / scale;
  return std::sin(x) - x;
}

NonlinearityBank nonlinearity_bank(const Parameters& p) {
  return {Nonlinearity{"homodyne residual sin(x)-x",
                       [p](double nu) { return estimator_nonlinearity(nu, p); }, 1.0}};
}

namespace reference {

Matrix augmented_drift() {
  Matrix a(3, 3);
  a << -9.14e3, 0.0, 0.0,
       2048.0, -1.94e6, -1.19e6,
       0.0, 1.048e6, 0.0;
  return a;
}

DelayModel delay_model() {
  const Matrix ap = augmented_drift();
  DelayModel m;
  m.Fa = ap.bottomRightCorner(2, 2);
  m.Ga = Matrix::Zero(2, 1);
  m.Ga(0, 0) = ap(1, 0);
  m.Ha = Matrix::Zero(1, 2);
  m.Ha(0, 0) = 2.0 * m.Fa(0, 0) / m.Ga(0, 0);
  m.Ja = Matrix::Identity(1, 1);
  m.delta = delta;
  m.order = 2;
  return m;
}

Matrix estimator_drift() {
  Matrix a(3, 3);
  a << -4.58e5, -0.09, -7.14,
       1.93e3, -1.93e6, -1.19e6,
       -550.1, 1.0486e6, -0.01;
  return a;
}

Matrix estimator_input() {
  Matrix b(3, 2);
  b << 4.45e5, -190.97,
       120.98, -0.052,
       545.41, -0.233;
  return b;
}

Matrix estimator_output() {
  Matrix c(2, 3);
  c << 1.02, 4.21e-7, 3.23e-5,
       944.68, 3.9e-4, 0.0299;
  return c;
}

synthesis::SynthesisSolution tabulated_design() {
  synthesis::SynthesisSolution s;
  s.point.tau = tau;
  s.point.lambda = Eigen::Map<const Vector>(lambda, 4);
  s.Ac = estimator_drift();
  s.Bc_tilde = estimator_input();
  s.Cc_tilde = estimator_output();
  s.Vtau = std::numeric_limits<double>::quiet_NaN();
  s.rhoYX = std::numeric_limits<double>::quiet_NaN();
  s.nbar = 1;
  s.na = 2;
  return s;
}

}  // namespace reference
}  // namespace rfls::homodyne
