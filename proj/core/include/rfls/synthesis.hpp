#pragma once

// Minimax-LQG synthesis of the robust filter/smoother: IQC multipliers,
// the scaled filter and control Riccati equations, estimator gains, the
// guaranteed cost bound, and its minimisation over the scaling parameters.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfls/model.hpp"
#include "rfls/types.hpp"

namespace rfls::synthesis {

/// Scaling parameters (τ̄, λ). λ is ordered by IQC family: k uncertainty
/// channels, then g difference IQCs (μ - μ̃), g plant IQCs (μ), g estimator
/// copy IQCs (μ̃).
struct ScalingPoint {
  double tau = 0.0;
  Vector lambda;
};

/// M(λ) = Σ λᵢ Mᵢ on ξ̃, N(λ) = Σ λᵢ Nᵢ on ζ̃, with Mᵢ = mᵢᵀmᵢ, Nᵢ = nᵢᵀnᵢ.
struct MultiplierPair {
  Matrix M;
  Matrix N;
  MatrixList Mi;
  MatrixList Ni;
};

MultiplierPair assemble_multipliers(const CompactPlant& cp, const Vector& lambda);

struct Feasibility {
  bool feasible = false;
  /// λ_min(M⁻¹ - JJᵀ), or -inf when M is not positive definite.
  double margin = 0.0;
};

/// λ >= 0, M(λ) ≻ 0 and M(λ)⁻¹ ⪰ JJᵀ, the last up to a relative rounding
/// allowance of 1e-12 so that boundary points are accepted.
Feasibility feasible(const ScalingPoint& point, const CompactPlant& cp);

/// Which output the cost penalises.
enum class TargetOutput {
  /// w = C_p0 x_p (the weighting as printed in the cost matrices).
  printed,
  /// w_a = C_a x_p (the delayed target).
  delayed,
};

struct SynthesisOptions {
  TargetOutput target = TargetOutput::printed;
  /// Both Riccati residuals must satisfy ‖res‖_F <= tol · (1 + ‖X‖_F²).
  double residual_tol = 1e-8;
  /// X ⪰ 0 is accepted when λ_min(X) >= -psd_tol · max(1, ‖X‖).
  double psd_tol = 1e-10;
};

/// Quantities shared by both Riccati equations at one scaling point.
struct ScaledTerms {
  MultiplierPair mult;
  Matrix Minv;
  Matrix process;  ///< B̃1 M⁻¹ B̃1ᵀ (Bp1 Bp1ᵀ without uncertainty channels)
  Matrix E;     ///< D̃21 M⁻¹ D̃21ᵀ (D̄21 D̄21ᵀ without uncertainty channels)
  Matrix Einv;
  Matrix R;     ///< Cwᵀ Cw + τ̄ C̃1ᵀ N C̃1
  Matrix G;     ///< diag(I_m, 0_g) + τ̄ D̃12ᵀ N D̃12
  Matrix Gamma; ///< -[Cwᵀ, 0] + τ̄ C̃1ᵀ N D̃12
  /// (Y C̃2ᵀ + B̃1 M⁻¹ D̃21ᵀ) minus its Y term: B̃1 M⁻¹ D̃21ᵀ
  Matrix cross;  ///< B̃1 M⁻¹ D̃21ᵀ (Bp1 D̄21ᵀ without uncertainty channels)
};

/// Throws InfeasibleError if M or E is singular.
ScaledTerms scaled_terms(const CompactPlant& cp, const ScalingPoint& point,
                         const SynthesisOptions& opts = {});

struct RiccatiResult {
  Matrix value;
  double residual = 0.0;
  double scaled_residual = 0.0;
  bool stabilizing = false;
};

/// Y ≻ 0 solving
///   A_s Y + Y A_sᵀ - Y (C̃2ᵀE⁻¹C̃2 - R/τ̄) Y + B̃1M⁻¹B̃1ᵀ - B̃1M⁻¹D̃21ᵀE⁻¹D̃21M⁻¹B̃1ᵀ = 0,
/// A_s = A_p - B̃1M⁻¹D̃21ᵀE⁻¹C̃2.
RiccatiResult filter_riccati(const CompactPlant& cp, const ScalingPoint& point,
                             const SynthesisOptions& opts = {});
RiccatiResult filter_riccati(const CompactPlant& cp, const ScalingPoint& point,
                             const ScaledTerms& terms, const SynthesisOptions& opts = {});

/// X ⪰ 0 solving X A_p + A_pᵀ X + (1/τ̄) X B̃1M⁻¹B̃1ᵀ X + R - Γ G⁻¹ Γᵀ = 0.
RiccatiResult control_riccati(const CompactPlant& cp, const ScalingPoint& point,
                              const SynthesisOptions& opts = {});
RiccatiResult control_riccati(const CompactPlant& cp, const ScalingPoint& point,
                              const ScaledTerms& terms, const SynthesisOptions& opts = {});

struct SynthesisSolution {
  ScalingPoint point;
  Matrix Y;
  Matrix X;
  Matrix Ac;
  Matrix Bc_tilde;  ///< [B_c, Ḡ_c]: n×(l+g)
  Matrix Cc_tilde;  ///< [C_c; K̄_c]: (m+g)×n
  double Vtau = 0.0;
  double rhoYX = 0.0;
  double residual_Y = 0.0;
  double residual_X = 0.0;
  double scaled_residual_Y = 0.0;
  double scaled_residual_X = 0.0;
  Eigen::Index nbar = 0;
  Eigen::Index na = 0;

  /// Rows of B̃_c acting on the plant states (the filter gain).
  Matrix filter_gain() const { return Bc_tilde.topRows(nbar); }
  /// Rows of B̃_c acting on the delay states (the smoother gain).
  Matrix smoother_gain() const { return Bc_tilde.bottomRows(na); }
};

/// Gains from given Y, X. Throws CouplingViolation when ρ(YX) >= τ̄.
SynthesisSolution compute_gains(const CompactPlant& cp, const ScalingPoint& point,
                                const Matrix& Y, const Matrix& X,
                                const SynthesisOptions& opts = {});

/// Guaranteed cost bound
///   V = ½ tr[Y R + (Y C̃2ᵀ + B̃1M⁻¹D̃21ᵀ) E⁻¹ (C̃2 Y + D̃21M⁻¹B̃1ᵀ) X (I - YX/τ̄)⁻¹].
double cost_bound(const CompactPlant& cp, const ScalingPoint& point, const Matrix& Y,
                  const Matrix& X, const SynthesisOptions& opts = {});

/// Full pipeline at one point with every invariant asserted (feasibility,
/// residuals, Y ≻ 0, X ⪰ 0, coupling). Throws InfeasibleError or
/// NumericalError.
SynthesisSolution synthesize(const CompactPlant& cp, const ScalingPoint& point,
                             const SynthesisOptions& opts = {});

// ---------------------------------------------------------------------------
// Bound minimisation

struct OptimizerOptions {
  int starts = 8;
  std::uint64_t seed = 42;
  double tau_min = 1e-9;
  double tau_max = 1e-3;
  /// Log-spaced τ̄ nodes of the initial scan.
  int tau_scan_points = 25;
  /// Random multiplier draws tried at each scan node.
  int samples_per_node = 32;
  /// Box on each λᵢ (empty: [1e-6, 1e2] on every coordinate).
  Vector lambda_lo;
  Vector lambda_hi;
  /// Required margin on M⁻¹ - JJᵀ.
  double slack = 1e-9;
  /// Pattern-search step lengths in log units.
  double initial_step = 0.5;
  double min_step = 1e-7;
  int max_evaluations_per_start = 20000;
  int threads = 0;  ///< 0: hardware concurrency
  SynthesisOptions synthesis;
};

struct TraceEntry {
  int start = 0;
  std::string stage;
  double tau = 0.0;
  Vector lambda;
  double value = 0.0;  ///< V, +inf when the point is infeasible
};

struct OptimizationResult {
  SynthesisSolution best;
  std::vector<TraceEntry> trace;
  int evaluations = 0;
  int best_start = -1;
};

/// Minimises V over (τ̄, λ). Each start scans log τ̄ with random multiplier
/// draws, then runs a compass search jointly in (log τ̄, log λ) where points
/// that are infeasible or admit no estimator count as +inf. Start 0 begins at
/// `init`; the others at seeded samples of the multiplier box. The best result
/// over all starts and `init` itself is returned (ties: smallest λ
/// lexicographically). Throws InfeasibleError when no feasible point is found.
OptimizationResult minimize_bound(const CompactPlant& cp, const ScalingPoint& init,
                                  const OptimizerOptions& opts = {});

/// V at a point, or +inf when synthesis fails there.
double bound_or_inf(const CompactPlant& cp, const ScalingPoint& point,
                    const SynthesisOptions& opts = {});

}  // namespace rfls::synthesis
