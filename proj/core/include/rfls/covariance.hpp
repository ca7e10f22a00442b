#pragma once

// Closed loop of the augmented plant and the synthesized estimator under a
// structured uncertainty Δ, its stationary covariance, and the error
// covariances of the smoothed and filtered estimates.

#include <vector>

#include "rfls/model.hpp"
#include "rfls/synthesis.hpp"
#include "rfls/types.hpp"

namespace rfls::covariance {

/// Which noise enters the estimator side of the closed-loop input matrix.
enum class NoiseModel {
  /// B̃_c D̄21 with D̄21 = [[D21, 0], [0, J21]]: the fictitious J21 channel on
  /// the estimator copy is driven as well.
  printed,
  /// B̃_c [[D21, 0], [0, 0]]: only the physical measurement noise.
  physical,
};

struct ClosedLoopModel {
  Matrix Abold;  ///< 2n×2n
  Matrix Bbold;  ///< 2n×(q+g)
  Matrix Delta;  ///< (r+2g)×(h+2g)
  Matrix L0;     ///< [C_p0, 0]: true output
  Matrix La;     ///< [0, C_a]: smoothed estimate
  Matrix Lf;     ///< [0, C_c]: filtered estimate
  Eigen::Index n = 0;
};

/// Δ = diag(Δ1 I on the uncertainty channels, Δ2 I_g, Δ2 I_g), shaped
/// (r+2g)×(h+2g); off-square channel blocks take Δ1 on their leading diagonal.
Matrix structured_delta(const CompactPlant& cp, double delta1, double delta2);

/// 𝐀 = [[A_p + B̃1ΔC̃1, B̃1ΔD̃12C̃_c], [B̃_cC̃2 + B̃_cD̃21ΔC̃1, A_c + B̃_cD̃21ΔD̃12C̃_c]],
/// 𝐁 = [[B_p1], [B̃_c D̄21]]. Throws DomainError when ‖Δ‖₂ > 1.
ClosedLoopModel build_closed_loop(const CompactPlant& cp,
                                  const synthesis::SynthesisSolution& sol, const Matrix& Delta,
                                  NoiseModel noise = NoiseModel::printed);

struct CovarianceReport {
  Matrix P;    ///< stationary covariance of [x_p; x̂]
  Matrix Phi;  ///< e^{𝐀δ}
  Matrix Psa;  ///< E[(ŵ_a(t+δ) - w(t))(·)ᵀ]
  Matrix Pf;   ///< E[(ŵ(t) - w(t))(·)ᵀ]
  double delta2 = 0.0;
  double lyapunov_residual = 0.0;
};

/// Stationary covariance from 𝐀P + P𝐀ᵀ + 𝐁𝐁ᵀ = 0 and
///   Psa = L0PL0ᵀ - LaΦPL0ᵀ - (LaΦPL0ᵀ)ᵀ + LaPLaᵀ,  L0 = [C_p0, 0], La = [0, C_a].
/// Throws UnstableError when 𝐀 is not Hurwitz.
CovarianceReport smoothed_error_covariance(const ClosedLoopModel& loop, const Matrix& Cp0_row,
                                           const Matrix& Ca_row, double delta);
/// Same, with the selectors stored in the loop.
CovarianceReport smoothed_error_covariance(const ClosedLoopModel& loop, double delta);

struct SweepRow {
  double delta2 = 0.0;
  double psa = 0.0;  ///< NaN when the loop is not Hurwitz
  double pf = 0.0;
  bool hurwitz = false;
  double abscissa = 0.0;  ///< max Re eig(𝐀)
};

/// Covariances over a grid of Δ2 ∈ [-1, 0] with Δ1 fixed, sorted by
/// descending Δ2 (nominal first). Duplicate grid points are merged. Throws
/// DomainError for grid points outside [-1, 0].
std::vector<SweepRow> delta_sweep(const CompactPlant& cp,
                                  const synthesis::SynthesisSolution& sol,
                                  const std::vector<double>& grid, double delta,
                                  NoiseModel noise = NoiseModel::printed, double delta1 = 0.0);

/// n evenly spaced points from 0 down to -1.
std::vector<double> uniform_grid(int points);

}  // namespace rfls::covariance
