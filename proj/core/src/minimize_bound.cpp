#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "rfls/errors.hpp"
#include "rfls/rng.hpp"
#include "rfls/synthesis.hpp"

namespace rfls::synthesis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Search coordinates: u = [log τ̄; log λ].
struct Box {
  Vector lo;
  Vector hi;

  Vector clamp(const Vector& u) const { return u.cwiseMax(lo).cwiseMin(hi); }
};

struct StartOutcome {
  int start = 0;
  double value = kInf;
  ScalingPoint point;
  std::vector<TraceEntry> trace;
  int evaluations = 0;
};

ScalingPoint to_point(const Vector& u) {
  return {std::exp(u(0)), u.tail(u.size() - 1).array().exp().matrix()};
}

class Objective {
 public:
  Objective(const CompactPlant& cp, const OptimizerOptions& opts) : cp_(cp), opts_(opts) {}

  double operator()(const Vector& u) {
    ++evaluations;
    const ScalingPoint p = to_point(u);
    const auto f = feasible(p, cp_);
    if (!f.feasible || f.margin < opts_.slack) return kInf;
    return bound_or_inf(cp_, p, opts_.synthesis);
  }

  bool admissible(const Vector& u) const {
    const auto f = feasible(to_point(u), cp_);
    return f.feasible && f.margin >= opts_.slack;
  }

  int evaluations = 0;

 private:
  const CompactPlant& cp_;
  const OptimizerOptions& opts_;
};

// Log-uniform multiplier draw at fixed log τ̄, rejecting points outside the
// feasibility set.
bool sample_admissible(const Objective& obj, const Box& box, double log_tau,
                       rng::Xoshiro256pp& gen, Vector& u) {
  u.resize(box.lo.size());
  u(0) = log_tau;
  for (int attempt = 0; attempt < 2000; ++attempt) {
    for (Eigen::Index i = 1; i < u.size(); ++i) {
      u(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * gen.uniform();
    }
    if (obj.admissible(u)) return true;
  }
  return false;
}

// Compass search with opportunistic polling; the step halves whenever no
// coordinate move improves. Infinite values never win, so the iterate stays
// inside the region where an estimator exists.
double compass_search(Objective& obj, const Box& box, Vector& u, double fu,
                      const OptimizerOptions& opts, int budget) {
  double step = opts.initial_step;
  const int start_evals = obj.evaluations;
  while (step >= opts.min_step && obj.evaluations - start_evals < budget) {
    bool improved = false;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        Vector trial = u;
        trial(i) += sign * step;
        trial = box.clamp(trial);
        if (trial(i) == u(i)) continue;
        const double ft = obj(trial);
        if (ft < fu) {
          u = trial;
          fu = ft;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return fu;
}

StartOutcome run_start(const CompactPlant& cp, const ScalingPoint& init, const Box& box,
                       const OptimizerOptions& opts, int start) {
  StartOutcome out;
  out.start = start;
  Objective obj(cp, opts);
  rng::Xoshiro256pp gen(rng::stream_seed(opts.seed, static_cast<std::uint64_t>(start)));
  auto record = [&](const char* stage, const Vector& u, double value) {
    const auto p = to_point(u);
    out.trace.push_back({start, stage, p.tau, p.lambda, value});
  };

  Vector u0(box.lo.size());
  u0(0) = std::log(init.tau);
  if (start == 0) {
    u0.tail(u0.size() - 1) = init.lambda.array().max(1e-300).log().matrix();
  } else if (!sample_admissible(obj, box, u0(0), gen, u0)) {
    out.evaluations = obj.evaluations;
    return out;
  }
  u0 = box.clamp(u0);
  Vector best_u = u0;
  double best_v = obj(u0);
  record("start", u0, best_v);

  // Scan of log τ̄: at each node the start's multipliers and fresh draws.
  const int nodes = std::max(2, opts.tau_scan_points);
  for (int i = 0; i < nodes; ++i) {
    const double lt = box.lo(0) + (box.hi(0) - box.lo(0)) * i / (nodes - 1);
    Vector u = u0;
    u(0) = lt;
    double v = obj(u);
    if (v < best_v) {
      best_v = v;
      best_u = u;
    }
    for (int s = 0; s < opts.samples_per_node; ++s) {
      if (!sample_admissible(obj, box, lt, gen, u)) break;
      v = obj(u);
      if (v < best_v) {
        best_v = v;
        best_u = u;
      }
    }
  }
  if (!std::isfinite(best_v)) {
    out.evaluations = obj.evaluations;
    return out;
  }
  record("scan", best_u, best_v);

  best_v = compass_search(obj, box, best_u, best_v, opts,
                          std::max(0, opts.max_evaluations_per_start - obj.evaluations));
  record("pattern", best_u, best_v);

  out.point = to_point(best_u);
  out.value = best_v;
  out.evaluations = obj.evaluations;
  return out;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return a.size() < b.size();
}

}  // namespace

OptimizationResult minimize_bound(const CompactPlant& cp, const ScalingPoint& init,
                                  const OptimizerOptions& opts) {
  const Eigen::Index nl = cp.ktilde();
  if (init.lambda.size() != nl) {
    throw ConfigError("initial lambda has " + std::to_string(init.lambda.size()) +
                      " entries, expected " + std::to_string(nl));
  }
  if (!(opts.tau_min > 0.0) || !(opts.tau_max > opts.tau_min)) {
    throw ConfigError("tau bounds must satisfy 0 < tau_min < tau_max");
  }
  if (!(init.tau > 0.0)) throw ConfigError("initial tau must be positive");
  if (opts.starts < 1) throw ConfigError("at least one optimizer start is required");
  if (!(opts.initial_step > 0.0) || !(opts.min_step > 0.0)) {
    throw ConfigError("pattern-search steps must be positive");
  }

  const Vector lo = opts.lambda_lo.size() ? opts.lambda_lo : Vector::Constant(nl, 1e-6);
  const Vector hi = opts.lambda_hi.size() ? opts.lambda_hi : Vector::Constant(nl, 1e2);
  if (lo.size() != nl || hi.size() != nl || (lo.array() <= 0.0).any() ||
      (hi.array() < lo.array()).any()) {
    throw ConfigError("lambda box must have k + 3g positive entries with lo <= hi");
  }
  Box box;
  box.lo.resize(nl + 1);
  box.hi.resize(nl + 1);
  box.lo(0) = std::log(opts.tau_min);
  box.hi(0) = std::log(opts.tau_max);
  box.lo.tail(nl) = lo.array().log().matrix();
  box.hi.tail(nl) = hi.array().log().matrix();

  std::vector<StartOutcome> outcomes(opts.starts);
  const unsigned threads = opts.threads > 0 ? static_cast<unsigned>(opts.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1) {
    for (int s = 0; s < opts.starts; ++s) outcomes[s] = run_start(cp, init, box, opts, s);
  } else {
    for (int base = 0; base < opts.starts; base += static_cast<int>(threads)) {
      std::vector<std::future<StartOutcome>> jobs;
      for (int s = base; s < std::min(opts.starts, base + static_cast<int>(threads)); ++s) {
        jobs.push_back(std::async(std::launch::async,
                                  [&, s] { return run_start(cp, init, box, opts, s); }));
      }
      for (auto& j : jobs) {
        auto o = j.get();
        outcomes[o.start] = std::move(o);
      }
    }
  }

  OptimizationResult result;
  // The initial point competes as-is, when inside the box, so the result is
  // never worse than it.
  StartOutcome given;
  given.start = -1;
  given.point = init;
  Vector u_init(nl + 1);
  u_init(0) = std::log(init.tau);
  u_init.tail(nl) = init.lambda.array().max(1e-300).log().matrix();
  if (box.clamp(u_init) == u_init) {
    given.value = bound_or_inf(cp, init, opts.synthesis);
    result.evaluations = 1;
  }

  const StartOutcome* best = std::isfinite(given.value) ? &given : nullptr;
  for (const auto& o : outcomes) {
    result.evaluations += o.evaluations;
    result.trace.insert(result.trace.end(), o.trace.begin(), o.trace.end());
    if (!std::isfinite(o.value)) continue;
    if (!best || o.value < best->value ||
        (o.value == best->value && lex_less(o.point.lambda, best->point.lambda))) {
      best = &o;
    }
  }
  if (!best) throw InfeasibleError("bound minimisation found no feasible scaling point");
  result.best = synthesize(cp, best->point, opts.synthesis);
  result.best_start = best->start;
  return result;
}

}  // namespace rfls::synthesis
