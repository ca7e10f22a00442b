#pragma once

// Euler-Maruyama simulation of the adaptive homodyne loop with the
// synthesized estimator in feedback, and Monte Carlo error statistics.

#include <cstdint>
#include <vector>

#include "rfls/model.hpp"
#include "rfls/synthesis.hpp"
#include "rfls/types.hpp"

namespace rfls::sim {

enum class Estimator { ngcf, smoother };
enum class Measurement {
  sine,    ///< dI = 2α sin(φ - φ̂) dt + dW
  linear,  ///< dI = 2αβ (φ - φ̂) dt + dW
};
/// What the smoother output is compared against.
enum class SmootherTarget { delayed, undelayed };

struct SimConfig {
  double kappa = 4.0e4;
  double lambda_ou = 9.14e3;
  double alpha = 1162.0;
  double beta_slope = 1.0;
  double gamma = 0.4;
  double dt = 1e-8;
  double horizon = 1e-3;
  double delta = 3.1e-6;
  int runs = 2000;
  std::uint64_t master_seed = 42;
  Estimator estimator = Estimator::smoother;
  Measurement measurement = Measurement::sine;
  SmootherTarget target = SmootherTarget::delayed;
  bool measurement_noise = true;
  /// Use the estimator copy of the nonlinearity.
  bool nonlinearity_copy = true;
  double phi0 = 0.0;
  /// 0: hardware concurrency
  int threads = 0;
  /// Record every k-th step of the trajectory (0: none).
  int trajectory_stride = 0;
};

/// Throws ConfigError on dt <= 0, horizon < 100 dt, delta < 0, a non-integral
/// delta/dt, or runs < 1.
void validate(const SimConfig& cfg);

/// Estimator matrices used by the loop: dx̂ = (A_c x̂ + G_c ψ(K_c x̂)) dt + B_c dȳ,
/// φ̂ = C_c x̂, smoothed output C_a x̂.
struct LoopGains {
  Matrix Ac;
  Matrix Bc;  ///< n×1
  Matrix Gc;  ///< n×g, g ∈ {0, 1}
  Matrix Cc;  ///< 1×n
  Matrix Kc;  ///< g×n
  Matrix Ca;  ///< 1×n
};

LoopGains loop_gains(const synthesis::SynthesisSolution& sol, const CompactPlant& cp);

struct TrajectoryPoint {
  double t = 0.0;
  double phi = 0.0;
  double phi_hat = 0.0;
  double smoothed = 0.0;
};

struct RunResult {
  double filter_error = 0.0;    ///< φ̂(T) - φ(T)
  double smoother_error = 0.0;  ///< (C_a x̂)(T) - φ(T - δ), or - φ(T) when undelayed
  bool divergent = false;
  /// Steps where |φ - φ̂| left the range on which the sector bound holds.
  std::int64_t sector_violations = 0;
  std::vector<TrajectoryPoint> trajectory;
};

/// Largest e with |sin e - e| <= γ|e| on [0, e]; +inf for γ >= 1.
double sector_range(double gamma);

/// Noise streams for one run are seeded from `seed` alone.
RunResult simulate_run(const SimConfig& cfg, const LoopGains& gains, std::uint64_t seed);

/// Runs 0..runs-1 with seeds derived from (master_seed, index).
std::vector<RunResult> run_ensemble(const SimConfig& cfg, const LoopGains& gains);

struct MonteCarloReport {
  Estimator estimator = Estimator::smoother;
  double error_covariance = 0.0;
  double standard_error = 0.0;  ///< +inf when fewer than two runs complete
  double mean_error = 0.0;
  int runs_requested = 0;
  int runs_completed = 0;
  int runs_divergent = 0;
  bool healthy = true;  ///< at most 1% divergent
  std::int64_t sector_violations = 0;
  std::vector<double> errors;  ///< terminal errors of completed runs, by run index
};

MonteCarloReport summarize(const std::vector<RunResult>& runs, Estimator which);

MonteCarloReport monte_carlo(const SimConfig& cfg, const LoopGains& gains);

}  // namespace rfls::sim
