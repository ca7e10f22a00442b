#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace rfls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using MatrixList = std::vector<Matrix>;

/// Symmetric part, (M + Mᵀ)/2.
inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace rfls
