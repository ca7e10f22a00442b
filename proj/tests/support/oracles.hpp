#pragma once

// Reference computations for the tests. Each is written from first
// principles and shares no code with the library kernels.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace rfls::oracle {

using Mat = Eigen::MatrixXd;

/// A P + P Aᵀ + W = 0 through the n²×n² Kronecker system.
Mat kron_lyapunov(const Mat& a, const Mat& w);

/// X A + Aᵀ X + X S X + Q = 0 from eigenvectors of [[A, S], [-Q, -Aᵀ]]:
/// X = U₂ U₁⁻¹ over the eigenvectors with negative real part.
Mat eigenvector_care(const Mat& a, const Mat& s, const Mat& q);

/// e^{A t} by scaling and squaring of a Taylor series summed until the
/// Lagrange remainder bound falls below 1e-18 (relative).
Mat taylor_expm(const Mat& a, double t);

/// Stabilizing root of s x² + 2 a x + q = 0 (a + s x < 0).
double scalar_care(double a, double s, double q);

/// Padé denominator coefficients c_0..c_N in ascending powers of s from the
/// closed form c_k = (2N - k)! N! / ((2N)! k! (N - k)!) δ^k.
std::vector<double> pade_coefficients(int order, double delta);

/// p(-jω) / p(jω) for the polynomial above.
std::complex<double> pade_response(const std::vector<double>& c, double omega);

/// Feasibility of λ = a / 100 against the closed-form constraint list,
/// in exact integer arithmetic.
bool feasible_hundredths(int a1, int a2, int a3, int a4);

/// Random matrices for the oracle comparisons.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : gen_(seed) {}
  Mat gaussian(int rows, int cols);
  /// Gaussian matrix shifted so its spectral abscissa is -margin.
  Mat hurwitz(int n, double margin = 0.5);

 private:
  std::mt19937_64 gen_;
};

}  // namespace rfls::oracle
