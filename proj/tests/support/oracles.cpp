#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace rfls::oracle {

Mat kron_lyapunov(const Mat& a, const Mat& w) {
  const Eigen::Index n = a.rows();
  const Mat eye = Mat::Identity(n, n);
  Mat k = Mat::Zero(n * n, n * n);
  // vec(AP) = (I ⊗ A) vec P, vec(PAᵀ) = (A ⊗ I) vec P, column-major vec.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += eye(i, j) * a + a(i, j) * eye;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(w.data(), n * n);
  const Eigen::VectorXd p = k.fullPivLu().solve(rhs);
  Mat out = Eigen::Map<const Mat>(p.data(), n, n);
  return 0.5 * (out + out.transpose());
}

Mat eigenvector_care(const Mat& a, const Mat& s, const Mat& q) {
  const Eigen::Index n = a.rows();
  Mat h(2 * n, 2 * n);
  h << a, s, -q, -a.transpose();
  Eigen::EigenSolver<Mat> es(h);
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  const Eigen::VectorXcd vals = es.eigenvalues();
  Eigen::MatrixXcd u(2 * n, n);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (vals(i).real() < 0.0) {
      if (col == n) throw std::runtime_error("too many stable eigenvalues");
      u.col(col++) = vecs.col(i);
    }
  }
  if (col != n) throw std::runtime_error("stable subspace has the wrong dimension");
  const Eigen::MatrixXcd x = u.bottomRows(n) * u.topRows(n).inverse();
  const Mat xr = x.real();
  return 0.5 * (xr + xr.transpose());
}

Mat taylor_expm(const Mat& a, double t) {
  const Eigen::Index n = a.rows();
  Mat m = a * t;
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scaled = norm;
  while (scaled > 0.5) {
    scaled *= 0.5;
    ++squarings;
  }
  m /= std::ldexp(1.0, squarings);
  // Remainder of the series truncated after term K is bounded by
  // ‖m‖^{K+1}/(K+1)! · e^{‖m‖} with ‖m‖ <= 1/2.
  Mat sum = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  double bound = 1.0;
  for (int k = 1; k < 60; ++k) {
    term = term * m / k;
    sum += term;
    bound *= scaled / (k + 1);
    if (bound * std::exp(scaled) < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

double scalar_care(double a, double s, double q) {
  if (s == 0.0) return -q / (2.0 * a);
  const double disc = a * a - s * q;
  if (disc < 0.0) throw std::runtime_error("no real root");
  // a + s x = -sqrt(disc) selects the stabilizing root.
  return (-a - std::sqrt(disc)) / s;
}

std::vector<double> pade_coefficients(int order, double delta) {
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  std::vector<double> c(order + 1);
  for (int k = 0; k <= order; ++k) {
    c[k] = fact(2 * order - k) * fact(order) / (fact(2 * order) * fact(k) * fact(order - k)) *
           std::pow(delta, k);
  }
  return c;
}

std::complex<double> pade_response(const std::vector<double>& c, double omega) {
  std::complex<double> num = 0.0, den = 0.0;
  const std::complex<double> s(0.0, omega);
  std::complex<double> pw = 1.0, pwn = 1.0;
  for (double ck : c) {
    den += ck * pw;
    num += ck * pwn;
    pw *= s;
    pwn *= -s;
  }
  return num / den;
}

bool feasible_hundredths(int a1, int a2, int a3, int a4) {
  if (a1 <= 0 || a2 <= 0 || a3 <= 0 || a4 <= 0) return false;
  if (a1 > 100) return false;
  if (a2 + a3 > 100 || a2 + a4 > 100) return false;
  const long long det = static_cast<long long>(100 - a2 - a3) * (100 - a2 - a4) -
                        static_cast<long long>(a2) * a2;
  return det >= 0;
}

Mat Draw::gaussian(int rows, int cols) {
  std::normal_distribution<double> nd;
  return Mat::NullaryExpr(rows, cols, [&] { return nd(gen_); });
}

Mat Draw::hurwitz(int n, double margin) {
  Mat a = gaussian(n, n);
  Eigen::EigenSolver<Mat> es(a, false);
  const double abscissa = es.eigenvalues().real().maxCoeff();
  return a - (abscissa + margin) * Mat::Identity(n, n);
}

}  // namespace rfls::oracle
