#pragma once

// Uncertain plant, delay augmentation, and the compact form consumed by the
// synthesis layer. Everything here is plain block-matrix assembly.

#include <functional>
#include <string>
#include <vector>

#include "rfls/delay.hpp"
#include "rfls/types.hpp"

namespace rfls {

/// dx = (A x + Σ B̄1ᵢ μᵢ + Σ B1ₛ ξₛ) dt + B1 dW
/// w = C0 x,  ζₛ = C1ₛ x,  νᵢ = C̄1ᵢ x
/// dy = (C2 x + Σ D̄21ᵢ μᵢ + Σ D21ₛ ξₛ) dt + D21 dW
/// with μᵢ = ψᵢ(νᵢ), ψᵢ βᵢ-Lipschitz, and ‖ξₛ‖ bounded by ‖ζₛ‖ in the
/// integral sense.
struct UncertainPlant {
  Matrix A;
  Matrix B1;
  MatrixList Bbar1;  ///< g columns, n̄×1
  MatrixList B1s;    ///< k blocks, n̄×rₛ
  Matrix C0;
  MatrixList C1s;    ///< k blocks, hₛ×n̄
  MatrixList Cbar1;  ///< g rows, 1×n̄
  Matrix C2;
  Matrix D21;
  MatrixList D21s;    ///< k blocks, l×rₛ
  MatrixList Dbar21;  ///< g columns, l×1
  std::vector<double> beta;
  MatrixList S;  ///< k SPD weights on x(0)

  Eigen::Index nbar() const { return A.rows(); }
  Eigen::Index m() const { return C0.rows(); }
  Eigen::Index l() const { return C2.rows(); }
  Eigen::Index q() const { return B1.cols(); }
  Eigen::Index g() const { return static_cast<Eigen::Index>(beta.size()); }
  Eigen::Index k() const { return static_cast<Eigen::Index>(B1s.size()); }
  Eigen::Index h() const;
  Eigen::Index r() const;
};

/// Dimension and definiteness violations; empty iff the plant is well-formed.
std::vector<std::string> validate_plant(const UncertainPlant& plant);

/// Scalar nonlinearities ψᵢ with their Lipschitz constants.
struct Nonlinearity {
  std::string name;
  std::function<double(double)> psi;
  double beta = 1.0;
};
using NonlinearityBank = std::vector<Nonlinearity>;

/// ψ(0) = 0 and |ψ(a) - ψ(b)| <= β|a - b| + tol on a grid of pairs in
/// [-range, range]. Returns the violations found.
std::vector<std::string> check_nonlinearity_bank(const NonlinearityBank& bank, double range,
                                                 int grid_points = 201, double tol = 1e-12);

/// Plant with the delay model appended to its state, x_p = [x; x_a].
struct AugmentedPlant {
  Matrix Ap;
  Matrix Bp1;
  MatrixList Bbar_p1;
  MatrixList Bp1s;
  Matrix Cp0;
  MatrixList Cp1s;
  MatrixList Cbar_p1;
  Matrix Cp2;
  Matrix D21;
  MatrixList D21s;
  MatrixList Dbar21;
  /// Delayed-output extraction, [Ja C0, Ha].
  Matrix Ca;
  Eigen::Index nbar = 0;
  Eigen::Index na = 0;

  Eigen::Index n() const { return Ap.rows(); }
};

AugmentedPlant augment_with_delay(const UncertainPlant& plant, const DelayModel& delay);

/// Augmented plant written with the stacked uncertainty input ξ̃ = [ξ; μ; μ̃],
/// the stacked uncertainty output ζ̃ = [ζ; ν; ν̃] + D̃12 ũ, and the extended
/// measurement ỹ = [y; μ̃].
struct CompactPlant {
  Matrix Ap;
  /// [Bp1, 0_{n×g}] so that it shares J's column space with D̄21.
  Matrix Bp1;
  Matrix Cp0;
  Matrix Ca;
  Matrix Btilde1;   ///< n×(r+2g)
  Matrix Ctilde1;   ///< (h+2g)×n
  Matrix Dtilde12;  ///< (h+2g)×(m+g)
  Matrix Ctilde2;   ///< (l+g)×n
  Matrix Dtilde21;  ///< (l+g)×(r+2g)
  Matrix Dbar21;    ///< (l+g)×(q+g)
  Matrix J;         ///< (r+2g)×(q+g)
  Matrix J21;       ///< g×g, SPD

  std::vector<Eigen::Index> channel_h;
  std::vector<Eigen::Index> channel_r;
  std::vector<double> beta;
  Eigen::Index nbar = 0;
  Eigen::Index na = 0;
  Eigen::Index m = 0;
  Eigen::Index l = 0;
  Eigen::Index q = 0;
  /// λ_min(D̄21 D̄21ᵀ)
  double d0 = 0.0;
  double assumption1_residual = 0.0;

  Eigen::Index n() const { return Ap.rows(); }
  Eigen::Index g() const { return static_cast<Eigen::Index>(beta.size()); }
  Eigen::Index k() const { return static_cast<Eigen::Index>(channel_h.size()); }
  Eigen::Index h() const;
  Eigen::Index r() const;
  Eigen::Index p() const { return h() + 2 * g(); }
  Eigen::Index ktilde() const { return k() + 3 * g(); }
};

struct CompactOptions {
  /// Required lower bound on λ_min(D̄21 D̄21ᵀ).
  double d0 = 1e-12;
  /// Residual bound for [Bp1; D̄21] = [B̃1; D̃21] J.
  double j_tolerance = 1e-8;
};

/// Stacks the compact form and constructs J (identity when it fits, least
/// squares otherwise). An empty J21 defaults to I_g. Throws ConfigError when
/// J21 is not SPD, when no J satisfies the stacking identity, or when
/// λ_min(D̄21 D̄21ᵀ) < d0.
CompactPlant build_compact(const AugmentedPlant& aug, const UncertainPlant& plant,
                           const Matrix& J21 = Matrix(), const CompactOptions& opts = {});

/// Apply x = T z to every state-side matrix of the compact plant.
CompactPlant transform_state(const CompactPlant& cp, const Matrix& t);

}  // namespace rfls
