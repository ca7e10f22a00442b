#pragma once

// Dense kernels shared by the synthesis and covariance layers: continuous
// algebraic Riccati equations with sign-indefinite quadratic terms, Lyapunov
// equations, the matrix exponential and the spectral radius.

#include "rfls/types.hpp"

namespace rfls::numkernel {

/// X A + Aᵀ X + X S X + Q = 0, with S allowed to be indefinite.
struct RiccatiProblem {
  Matrix A;
  Matrix Q;
  Matrix S;
};

struct CareOptions {
  /// Relative distance of a Hamiltonian eigenvalue from the imaginary axis
  /// (|Re λ| / max(1, max|λ|)) below which no stabilizing solution exists.
  double imaginary_axis_tol = 1e-11;
  /// Newton-Kleinman refinement starts when the scaled residual exceeds this.
  double refine_threshold = 1e-12;
  int max_newton_steps = 20;
};

struct CareSolution {
  Matrix X;
  /// ‖XA + AᵀX + XSX + Q‖_F
  double residual = 0.0;
  /// residual / (1 + ‖X‖_F²)
  double scaled_residual = 0.0;
  /// Re eig(A + S X) < 0
  bool stabilizing = false;
  int newton_steps = 0;
};

/// Residual of the generic Riccati equation at a candidate X.
Matrix care_residual(const RiccatiProblem& prob, const Matrix& x);

/// Stabilizing solution via the ordered real Schur form of the Hamiltonian
/// [[A, S], [-Q, -Aᵀ]], refined by Newton-Kleinman when needed. Throws
/// NoStabilizingSolution when the Hamiltonian has eigenvalues on the
/// imaginary axis or the stable subspace is not a graph.
CareSolution solve_care(const RiccatiProblem& prob, const CareOptions& opts = {});

struct LyapunovSolution {
  Matrix P;
  /// ‖AP + PAᵀ + W‖_F
  double residual = 0.0;
};

/// Solves A P + P Aᵀ + W = 0 for Hurwitz A (Bartels-Stewart on the complex
/// Schur form). W need only be symmetric. Throws UnstableError if A is not
/// Hurwitz.
LyapunovSolution solve_lyapunov(const Matrix& a, const Matrix& w);

/// e^{A t}
Matrix expm(const Matrix& a, double t);

/// max |eig(M)|
double spectral_radius(const Matrix& m);

/// max Re eig(M); -inf for an empty matrix.
double spectral_abscissa(const Matrix& m);

bool is_hurwitz(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Matrix& m);

std::vector<std::complex<double>> eigenvalues(const Matrix& m);

}  // namespace rfls::numkernel
