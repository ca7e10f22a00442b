#pragma once

#include <complex>

#include "rfls/types.hpp"

namespace rfls {

/// Finite-dimensional approximation of a pure delay w ↦ w(· - delta):
///   ẋ_a = Fa x_a + Ga w,   w_a = Ha x_a + Ja w.
struct DelayModel {
  Matrix Fa;
  Matrix Ga;
  Matrix Ha;
  Matrix Ja;
  double delta = 0.0;
  int order = 0;

  Eigen::Index states() const { return Fa.rows(); }
  Eigen::Index channels() const { return Ja.rows(); }

  /// Ha (jω I - Fa)⁻¹ Ga + Ja
  Eigen::MatrixXcd frequency_response(double omega) const;
  /// Ha (-Fa)⁻¹ Ga + Ja
  Matrix dc_gain() const;
  /// Ja, Ha Ga, Ha Fa Ga, ... (count entries)
  std::vector<Matrix> markov_parameters(int count) const;
};

enum class DelayRealization {
  /// Controllable companion form as written.
  companion,
  /// Companion form after a power-of-two diagonal balancing similarity.
  balanced,
};

inline constexpr int kMaxPadeOrder = 6;

/// Coefficients c_0..c_N (ascending powers of s) of the Padé polynomial p(s)
/// with e^{-sδ} ≈ p(-s)/p(s), normalised so c_0 = 1.
std::vector<double> pade_coefficients(int order, double delta);

/// [order/order] Padé approximant of e^{-sδ} realised for `channels`
/// independent scalar signals. Throws DomainError for delta <= 0 and
/// ConfigError for an order outside 1..kMaxPadeOrder.
DelayModel pade_delay(int order, double delta, Eigen::Index channels = 1,
                      DelayRealization realization = DelayRealization::balanced);

/// Zero-state delay (n_a = 0): w_a = w.
DelayModel identity_delay(Eigen::Index channels = 1);

/// max over a uniform grid on [0, omega_max] of ‖H(jω) - e^{-jωδ} I‖₂.
double delay_response_error(const DelayModel& model, double omega_max, int grid_points = 2001);

}  // namespace rfls
