#include "rfls/delay.hpp"

#include <cmath>
#include <string>

#include "rfls/errors.hpp"

namespace rfls {
namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Osborne iteration restricted to powers of two so that the similarity is
// exact in floating point.
Eigen::VectorXd balancing_scales(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  Matrix m = a;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(m(j, i));
        r += std::abs(m(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if ((c + r) < 0.95 * s) {
        converged = false;
        d(i) *= f;
        m.col(i) *= f;
        m.row(i) /= f;
      }
    }
  }
  return d;
}

}  // namespace

Eigen::MatrixXcd DelayModel::frequency_response(double omega) const {
  const std::complex<double> jw(0.0, omega);
  Eigen::MatrixXcd resp = Ja.cast<std::complex<double>>();
  if (states() == 0) return resp;
  Eigen::MatrixXcd si = -Fa.cast<std::complex<double>>();
  si.diagonal().array() += jw;
  resp += Ha.cast<std::complex<double>>() * si.partialPivLu().solve(Ga.cast<std::complex<double>>());
  return resp;
}

Matrix DelayModel::dc_gain() const {
  if (states() == 0) return Ja;
  return Ha * (-Fa).partialPivLu().solve(Ga) + Ja;
}

std::vector<Matrix> DelayModel::markov_parameters(int count) const {
  std::vector<Matrix> out;
  if (count <= 0) return out;
  out.push_back(Ja);
  Matrix fk_g = Ga;
  for (int k = 1; k < count; ++k) {
    out.push_back(states() == 0 ? Matrix::Zero(Ja.rows(), Ja.cols()) : Matrix(Ha * fk_g));
    if (states() > 0) fk_g = Fa * fk_g;
  }
  return out;
}

std::vector<double> pade_coefficients(int order, double delta) {
  std::vector<double> c(order + 1);
  const double norm = factorial(2 * order) / factorial(order);
  for (int k = 0; k <= order; ++k) {
    c[k] = factorial(2 * order - k) / (factorial(k) * factorial(order - k)) / norm *
           std::pow(delta, k);
  }
  return c;
}

DelayModel pade_delay(int order, double delta, Eigen::Index channels,
                      DelayRealization realization) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("delay must be positive, got " + std::to_string(delta));
  }
  if (order < 1 || order > kMaxPadeOrder) {
    throw ConfigError("unsupported Padé order " + std::to_string(order) + " (supported 1.." +
                      std::to_string(kMaxPadeOrder) + ")");
  }
  if (channels < 1) throw ConfigError("delay needs at least one channel");

  // Monic denominator s^N + a_{N-1}s^{N-1} + ... + a_0 and numerator p(-s)/c_N.
  const auto c = pade_coefficients(order, delta);
  const int n = order;
  const double lead = c[n];
  Eigen::VectorXd a(n), num(n + 1);
  for (int k = 0; k < n; ++k) a(k) = c[k] / lead;
  for (int k = 0; k <= n; ++k) num(k) = ((k % 2) ? -1.0 : 1.0) * c[k] / lead;
  const double feedthrough = num(n);  // (-1)^N
  // Strictly proper remainder num(s) - feedthrough * den(s).
  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) b(k) = num(k) - feedthrough * a(k);

  Matrix f = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) f(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) f(n - 1, k) = -a(k);
  Matrix g = Matrix::Zero(n, 1);
  g(n - 1, 0) = 1.0;
  Matrix h(1, n);
  for (int k = 0; k < n; ++k) h(0, k) = b(k);

  if (realization == DelayRealization::balanced) {
    const Eigen::VectorXd d = balancing_scales(f);
    // x = D z:  F' = D⁻¹ F D, G' = D⁻¹ G, H' = H D.
    f = d.cwiseInverse().asDiagonal() * f * d.asDiagonal();
    g = d.cwiseInverse().asDiagonal() * g;
    h = h * d.asDiagonal();
  }

  DelayModel m;
  const Matrix eye = Matrix::Identity(channels, channels);
  m.Fa = Matrix::Zero(n * channels, n * channels);
  m.Ga = Matrix::Zero(n * channels, channels);
  m.Ha = Matrix::Zero(channels, n * channels);
  for (Eigen::Index ch = 0; ch < channels; ++ch) {
    m.Fa.block(ch * n, ch * n, n, n) = f;
    m.Ga.block(ch * n, ch, n, 1) = g;
    m.Ha.block(ch, ch * n, 1, n) = h;
  }
  m.Ja = feedthrough * eye;
  m.delta = delta;
  m.order = order;
  return m;
}

DelayModel identity_delay(Eigen::Index channels) {
  DelayModel m;
  m.Fa = Matrix(0, 0);
  m.Ga = Matrix(0, channels);
  m.Ha = Matrix(channels, 0);
  m.Ja = Matrix::Identity(channels, channels);
  m.delta = 0.0;
  m.order = 0;
  return m;
}

double delay_response_error(const DelayModel& model, double omega_max, int grid_points) {
  if (!(omega_max > 0.0)) throw DomainError("omega_max must be positive");
  grid_points = std::max(grid_points, 2);
  double worst = 0.0;
  const Eigen::Index m = model.channels();
  for (int i = 0; i < grid_points; ++i) {
    const double w = omega_max * static_cast<double>(i) / (grid_points - 1);
    const std::complex<double> exact = std::polar(1.0, -w * model.delta);
    Eigen::MatrixXcd diff = model.frequency_response(w);
    diff.diagonal().array() -= exact;
    const double err = m == 1 ? std::abs(diff(0, 0))
                              : Eigen::JacobiSVD<Eigen::MatrixXcd>(diff).singularValues()(0);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace rfls
