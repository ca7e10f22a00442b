#pragma once

// Adaptive homodyne phase estimation: an Ornstein-Uhlenbeck phase observed
// through a sinusoidal photocurrent, linearised about the feedback point with
// the residual sin(e) - e treated as a sector-bounded nonlinearity.

#include "rfls/delay.hpp"
#include "rfls/model.hpp"
#include "rfls/synthesis.hpp"

namespace rfls::homodyne {

struct Parameters {
  double lambda = 9.14e3;  ///< mean reversion [rad/s]
  double kappa = 4.0e4;    ///< phase diffusion intensity [rad/s]
  double alpha = 1162.0;   ///< coherent amplitude |α| [1/s]
  double beta = 1.0;       ///< tangent slope of the measurement at the origin
  double gamma = 0.4;      ///< sector half-width
};

/// One state (the phase), one uncertainty channel carrying the process noise,
/// one nonlinearity channel carrying the measurement noise:
///   A = -λ, B1 = [√κ, 0], B1₁ = √κ, B̄1₁ = 0, C0 = C2 = 1, C1₁ = 0,
///   C̄1₁ = 2αγ, D21 = [0, 1/(2αβ)], D21₁ = 0, D̄21₁ = 1/(2αβ), β₁ = 1.
UncertainPlant plant(const Parameters& p);

/// Estimator copy of the nonlinearity, ψ(ν̃) = sin(ν̃/(2αγ)) - ν̃/(2αγ).
/// Returns 0 for γ = 0.
double estimator_nonlinearity(double nu, const Parameters& p);

NonlinearityBank nonlinearity_bank(const Parameters& p);

/// Reference values for the 3.1 µs second-order design of the example.
namespace reference {

inline constexpr double delta = 3.1e-6;
inline constexpr double tau = 1.13e-6;
inline constexpr double lambda[4] = {0.9727, 0.4831, 0.0015, 0.0014};
inline constexpr double cost_bound = 0.15;
inline constexpr double mc_smoother = 0.0605;
inline constexpr double mc_filter = 0.1031;

/// Augmented drift with the delay block as tabulated (3 significant digits).
Matrix augmented_drift();
/// Delay realization whose augmentation reproduces augmented_drift() exactly.
/// Ha is chosen so the tabulated denominator gives an all-pass response
/// (Ha = [-2 a₁ / Ga, 0], Ja = 1); it is not tabulated itself.
DelayModel delay_model();

Matrix estimator_drift();  ///< A_c
Matrix estimator_input();  ///< B̃_c
Matrix estimator_output(); ///< C̃_c

/// The tabulated estimator as a design at the tabulated scaling point. Y and
/// X are left empty and the cost bound is NaN: only the gains are given.
synthesis::SynthesisSolution tabulated_design();

}  // namespace reference

}  // namespace rfls::homodyne
