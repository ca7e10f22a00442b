#include "rfls/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "rfls/errors.hpp"
#include "rfls/rng.hpp"

namespace rfls::sim {
namespace {

constexpr int kMaxStates = 16;
constexpr double kDivergence = 1e3;

std::int64_t lag_steps(const SimConfig& cfg) {
  return static_cast<std::int64_t>(std::llround(cfg.delta / cfg.dt));
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("simulation dt must be positive");
  if (!(cfg.horizon >= 100.0 * cfg.dt)) throw ConfigError("simulation horizon must be >= 100 dt");
  if (!(cfg.delta >= 0.0)) throw ConfigError("simulation delta must be nonnegative");
  const double ratio = cfg.delta / cfg.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6) {
    throw ConfigError("simulation delta must be an integer multiple of dt");
  }
  if (lag_steps(cfg) > static_cast<std::int64_t>(std::llround(cfg.horizon / cfg.dt))) {
    throw ConfigError("simulation delta exceeds the horizon");
  }
  if (cfg.runs < 1) throw ConfigError("simulation needs at least one run");
  if (!(cfg.kappa >= 0.0) || !(cfg.alpha > 0.0) || !(cfg.beta_slope > 0.0) ||
      !(cfg.gamma >= 0.0)) {
    throw ConfigError("simulation needs kappa >= 0, alpha > 0, beta > 0, gamma >= 0");
  }
}

LoopGains loop_gains(const synthesis::SynthesisSolution& sol, const CompactPlant& cp) {
  const Eigen::Index n = sol.Ac.rows();
  const Eigen::Index l = cp.l;
  const Eigen::Index m = cp.m;
  const Eigen::Index g = cp.g();
  if (l != 1 || m != 1 || g > 1) {
    throw ConfigError("the homodyne loop needs one measurement, one output and at most one "
                      "nonlinearity");
  }
  if (sol.Bc_tilde.rows() != n || sol.Bc_tilde.cols() != l + g || sol.Cc_tilde.cols() != n ||
      sol.Cc_tilde.rows() != m + g || cp.Ca.cols() != n) {
    throw ConfigError("estimator gains do not match the plant dimensions");
  }
  LoopGains lg;
  lg.Ac = sol.Ac;
  lg.Bc = sol.Bc_tilde.leftCols(l);
  lg.Gc = sol.Bc_tilde.rightCols(g);
  lg.Cc = sol.Cc_tilde.topRows(m);
  lg.Kc = sol.Cc_tilde.bottomRows(g);
  lg.Ca = cp.Ca;
  return lg;
}

double sector_range(double gamma) {
  if (gamma >= 1.0) return std::numeric_limits<double>::infinity();
  if (gamma <= 0.0) return 0.0;
  // 1 - sin(e)/e increases from 0 on (0, π]; reaches 1 at π.
  double lo = 0.0, hi = M_PI;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - std::sin(mid) / mid <= gamma) lo = mid; else hi = mid;
  }
  return lo;
}

RunResult simulate_run(const SimConfig& cfg, const LoopGains& gains, std::uint64_t seed) {
  validate(cfg);
  const int n = static_cast<int>(gains.Ac.rows());
  if (n > kMaxStates || gains.Bc.rows() != n || gains.Cc.cols() != n || gains.Ca.cols() != n ||
      gains.Gc.rows() != n || gains.Kc.rows() != gains.Gc.cols()) {
    throw ConfigError("loop gains are inconsistent or too large for the simulator");
  }
  const bool copy = cfg.nonlinearity_copy && gains.Gc.cols() == 1 && cfg.gamma > 0.0;

  std::array<double, kMaxStates * kMaxStates> ac{};
  std::array<double, kMaxStates> bc{}, gc{}, cc{}, kc{}, ca{}, x{}, dx{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) ac[i * n + j] = gains.Ac(i, j);
    bc[i] = gains.Bc(i, 0);
    cc[i] = gains.Cc(0, i);
    ca[i] = gains.Ca(0, i);
    if (gains.Gc.cols() == 1) {
      gc[i] = gains.Gc(i, 0);
      kc[i] = gains.Kc(0, i);
    }
  }

  const std::int64_t steps = std::llround(cfg.horizon / cfg.dt);
  const std::int64_t lag = lag_steps(cfg);
  std::vector<double> history(static_cast<std::size_t>(lag + 1), cfg.phi0);

  const double dt = cfg.dt;
  const double sdt = std::sqrt(dt);
  const double sk = std::sqrt(cfg.kappa);
  const double gain2ab = 2.0 * cfg.alpha * cfg.beta_slope;
  const double scale_nl = 2.0 * cfg.alpha * cfg.gamma;
  const double range = sector_range(cfg.gamma);
  const double noise_w = cfg.measurement_noise ? 1.0 : 0.0;

  rng::Xoshiro256pp gen(seed);
  RunResult res;
  double phi = cfg.phi0;
  auto dot = [n](const std::array<double, kMaxStates>& a, const std::array<double, kMaxStates>& b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  auto record = [&](std::int64_t step) {
    res.trajectory.push_back({static_cast<double>(step) * dt, phi, dot(cc, x), dot(ca, x)});
  };
  if (cfg.trajectory_stride > 0) record(0);

  for (std::int64_t i = 0; i < steps; ++i) {
    const double dV = gen.normal() * sdt;
    const double dW = gen.normal() * sdt * noise_w;
    const double phi_hat = dot(cc, x);
    const double err = phi - phi_hat;
    if (std::abs(err) > range) ++res.sector_violations;

    const double drive = cfg.measurement == Measurement::sine ? 2.0 * cfg.alpha * std::sin(err)
                                                              : gain2ab * err;
    const double dI = drive * dt + dW;
    const double dy = (dI + gain2ab * phi_hat * dt) / gain2ab;
    double mu = 0.0;
    if (copy) {
      const double arg = dot(kc, x) / scale_nl;
      mu = std::sin(arg) - arg;
    }
    for (int r = 0; r < n; ++r) {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += ac[r * n + c] * x[c];
      dx[r] = (s + gc[r] * mu) * dt + bc[r] * dy;
    }
    for (int r = 0; r < n; ++r) x[r] += dx[r];
    phi += -cfg.lambda_ou * phi * dt + sk * dV;
    history[static_cast<std::size_t>(i % (lag + 1))] = phi;

    const double next_hat = dot(cc, x);
    if (!std::isfinite(next_hat) || std::abs(next_hat) > kDivergence || !std::isfinite(phi)) {
      res.divergent = true;
      res.filter_error = res.smoother_error = std::numeric_limits<double>::quiet_NaN();
      return res;
    }
    if (cfg.trajectory_stride > 0 && (i + 1) % cfg.trajectory_stride == 0) record(i + 1);
  }

  const double phi_delayed = history[static_cast<std::size_t>(steps % (lag + 1))];
  res.filter_error = dot(cc, x) - phi;
  res.smoother_error =
      dot(ca, x) - (cfg.target == SmootherTarget::delayed ? phi_delayed : phi);
  return res;
}

std::vector<RunResult> run_ensemble(const SimConfig& cfg, const LoopGains& gains) {
  validate(cfg);
  std::vector<RunResult> out(static_cast<std::size_t>(cfg.runs));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned threads =
      std::min<unsigned>(cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : hw,
                         static_cast<unsigned>(cfg.runs));
  auto work = [&](unsigned worker) {
    for (int r = static_cast<int>(worker); r < cfg.runs; r += static_cast<int>(threads)) {
      out[static_cast<std::size_t>(r)] =
          simulate_run(cfg, gains, rng::stream_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < threads; ++w) jobs.push_back(std::async(std::launch::async, work, w));
    for (auto& j : jobs) j.get();
  }
  return out;
}

MonteCarloReport summarize(const std::vector<RunResult>& runs, Estimator which) {
  MonteCarloReport rep;
  rep.estimator = which;
  rep.runs_requested = static_cast<int>(runs.size());
  for (const auto& r : runs) {
    rep.sector_violations += r.sector_violations;
    if (r.divergent) {
      ++rep.runs_divergent;
      continue;
    }
    rep.errors.push_back(which == Estimator::ngcf ? r.filter_error : r.smoother_error);
  }
  rep.runs_completed = static_cast<int>(rep.errors.size());
  rep.healthy = rep.runs_divergent * 100 <= rep.runs_requested;
  if (rep.runs_completed == 0) {
    rep.healthy = false;
    rep.error_covariance = rep.mean_error = std::numeric_limits<double>::quiet_NaN();
    rep.standard_error = std::numeric_limits<double>::infinity();
    return rep;
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double e : rep.errors) {
    sum += e;
    sum_sq += e * e;
  }
  const double count = rep.runs_completed;
  rep.mean_error = sum / count;
  rep.error_covariance = sum_sq / count;
  if (rep.runs_completed < 2) {
    rep.standard_error = std::numeric_limits<double>::infinity();
  } else {
    double var = 0.0;
    for (double e : rep.errors) {
      const double d = e * e - rep.error_covariance;
      var += d * d;
    }
    rep.standard_error = std::sqrt(var / (count - 1.0)) / std::sqrt(count);
  }
  return rep;
}

MonteCarloReport monte_carlo(const SimConfig& cfg, const LoopGains& gains) {
  return summarize(run_ensemble(cfg, gains), cfg.estimator);
}

}  // namespace rfls::sim
