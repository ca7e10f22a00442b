#include "rfls/numkernel.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfls/errors.hpp"

namespace rfls::numkernel {
namespace {

lapack_logical select_left_half_plane(const double* re, const double* /*im*/) {
  return *re < 0.0 ? 1 : 0;
}

std::string format_eigs(const std::vector<std::complex<double>>& ev) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (i) os << ", ";
    os << ev[i].real() << (ev[i].imag() < 0 ? "-" : "+") << std::abs(ev[i].imag()) << "i";
  }
  return os.str();
}

void check_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw ConfigError(std::string(name) + " must be square");
  }
}

// Solves Aᵀ Z + Z A + W = 0 (the Newton-Kleinman step form) through the
// general Lyapunov routine.
Matrix newton_step(const RiccatiProblem& prob, const Matrix& x) {
  const Matrix closed = prob.A + prob.S * x;
  const Matrix rhs = prob.Q - x * prob.S * x;
  return solve_lyapunov(closed.transpose(), symmetrize(rhs)).P;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  std::vector<std::complex<double>> out;
  if (m.size() == 0) return out;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  const auto& ev = es.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  return out;
}

double spectral_radius(const Matrix& m) {
  double rho = 0.0;
  for (const auto& z : eigenvalues(m)) rho = std::max(rho, std::abs(z));
  return rho;
}

double spectral_abscissa(const Matrix& m) {
  double a = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigenvalues(m)) a = std::max(a, z.real());
  return a;
}

bool is_hurwitz(const Matrix& m) { return spectral_abscissa(m) < 0.0; }

double min_symmetric_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix care_residual(const RiccatiProblem& prob, const Matrix& x) {
  return x * prob.A + prob.A.transpose() * x + x * prob.S * x + prob.Q;
}

CareSolution solve_care(const RiccatiProblem& prob, const CareOptions& opts) {
  check_square(prob.A, "Riccati A");
  const Eigen::Index n = prob.A.rows();
  if (prob.Q.rows() != n || prob.Q.cols() != n || prob.S.rows() != n ||
      prob.S.cols() != n) {
    throw ConfigError("Riccati Q and S must match the dimension of A");
  }
  CareSolution sol;
  if (n == 0) {
    sol.X = Matrix(0, 0);
    sol.stabilizing = true;
    return sol;
  }

  Matrix h(2 * n, 2 * n);
  h << prob.A, prob.S, -prob.Q, -prob.A.transpose();

  // Ordered real Schur form: stable eigenvalues first.
  Matrix t = h;
  Matrix z(2 * n, 2 * n);
  std::vector<double> wr(2 * n), wi(2 * n);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_dgees(
      LAPACK_COL_MAJOR, 'V', 'S', select_left_half_plane, static_cast<lapack_int>(2 * n),
      t.data(), static_cast<lapack_int>(t.outerStride()), &sdim, wr.data(), wi.data(),
      z.data(), static_cast<lapack_int>(z.outerStride()));
  if (info < 0) throw NumericalError("dgees: illegal argument");

  std::vector<std::complex<double>> ev(2 * n);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    ev[i] = {wr[i], wi[i]};
    scale = std::max(scale, std::abs(ev[i]));
  }
  for (const auto& e : ev) {
    if (std::abs(e.real()) <= opts.imaginary_axis_tol * scale) {
      throw NoStabilizingSolution(
          "Hamiltonian has eigenvalues on the imaginary axis: " + format_eigs(ev), ev);
    }
  }
  if (info > 0 || sdim != n) {
    throw NoStabilizingSolution(
        "Hamiltonian stable subspace has dimension " + std::to_string(sdim) + " != " +
            std::to_string(n) + "; eigenvalues: " + format_eigs(ev),
        ev);
  }

  const Matrix u11 = z.topLeftCorner(n, n);
  const Matrix u21 = z.bottomLeftCorner(n, n);
  Eigen::FullPivLU<Matrix> lu(u11.transpose());
  if (!lu.isInvertible() || lu.rcond() < 1e3 * std::numeric_limits<double>::epsilon()) {
    throw NoStabilizingSolution("stable invariant subspace is not a graph (U11 singular)",
                                ev);
  }
  // X = U21 U11⁻¹  <=>  U11ᵀ Xᵀ = U21ᵀ
  Matrix x = symmetrize(lu.solve(u21.transpose()).transpose());

  auto scaled = [&](const Matrix& cand) {
    return care_residual(prob, cand).norm() / (1.0 + cand.squaredNorm());
  };
  double best = scaled(x);
  int steps = 0;
  if (best > opts.refine_threshold) {
    Matrix cur = x;
    for (; steps < opts.max_newton_steps; ++steps) {
      Matrix next;
      try {
        next = symmetrize(newton_step(prob, cur));
      } catch (const UnstableError&) {
        break;
      }
      const double r = scaled(next);
      if (!std::isfinite(r)) break;
      cur = next;
      if (r < best) {
        best = r;
        x = next;
      } else if (r > 2.0 * best) {
        break;
      }
      if (best <= opts.refine_threshold * 1e-2) break;
    }
  }

  sol.X = x;
  sol.residual = care_residual(prob, x).norm();
  sol.scaled_residual = sol.residual / (1.0 + x.squaredNorm());
  sol.stabilizing = is_hurwitz(prob.A + prob.S * x);
  sol.newton_steps = steps;
  return sol;
}

LyapunovSolution solve_lyapunov(const Matrix& a, const Matrix& w) {
  check_square(a, "Lyapunov A");
  const Eigen::Index n = a.rows();
  if (w.rows() != n || w.cols() != n) {
    throw ConfigError("Lyapunov W must match the dimension of A");
  }
  LyapunovSolution out;
  if (n == 0) {
    out.P = Matrix(0, 0);
    return out;
  }
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "Lyapunov operator is not Hurwitz (max Re eig = " << abscissa << ")";
    throw UnstableError(os.str());
  }

  // A = U T Uᴴ, T upper triangular. With Z = Uᴴ P U the equation becomes
  // T Z + Z Tᴴ + C = 0, C = Uᴴ W U, solved column by column from the right.
  Eigen::ComplexSchur<ComplexMatrix> schur(a.cast<std::complex<double>>());
  const ComplexMatrix& tm = schur.matrixT();
  const ComplexMatrix& um = schur.matrixU();
  const ComplexMatrix c = um.adjoint() * w.cast<std::complex<double>>() * um;

  ComplexMatrix zm = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    ComplexVector rhs = -c.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(tm(j, k)) * zm.col(k);
    ComplexMatrix lhs = tm;
    lhs.diagonal().array() += std::conj(tm(j, j));
    zm.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  out.P = symmetrize((um * zm * um.adjoint()).real());
  out.residual = (a * out.P + out.P * a.transpose() + w).norm();
  return out;
}

Matrix expm(const Matrix& a, double t) {
  check_square(a, "expm argument");
  if (a.size() == 0) return Matrix(0, 0);
  if (t == 0.0) return Matrix::Identity(a.rows(), a.cols());
  const Matrix at = a * t;
  return at.exp();
}

}  // namespace rfls::numkernel
