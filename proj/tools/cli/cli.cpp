#include "cli/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "cli/artifacts.hpp"
#include "cli/pipeline.hpp"
#include "cli/reproduce.hpp"
#include "rfls/covariance.hpp"
#include "rfls/errors.hpp"
#include "rfls/numkernel.hpp"

namespace rfls::cli {

using serialize::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::string grid;
  bool paper_realization = false;
  std::string out_dir = "out";
  std::string target;
  std::optional<int> threads;
  bool tabulated_gains = false;
};

config::Config load(const Options& o) {
  config::Config cfg = o.config.empty() ? config::default_config() : config::load_config(o.config);
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.runs) {
    if (*o.runs < 1) throw ConfigError("--runs must be at least 1");
    cfg.simulation.runs = *o.runs;
  }
  if (o.paper_realization) cfg.delay.realization = config::RealizationKind::paper;
  if (!o.target.empty()) cfg.synthesis.target = config::parse_target(o.target);
  if (!o.grid.empty()) cfg.sweep.grid = parse_grid(o.grid);
  if (o.threads) {
    cfg.synthesis.optimizer.threads = *o.threads;
    cfg.simulation.threads = *o.threads;
  }
  return cfg;
}

json arguments_json(const Options& o) {
  json j;
  j["config"] = o.config.empty() ? "<default>" : o.config;
  if (o.seed) j["seed"] = *o.seed;
  if (o.runs) j["runs"] = *o.runs;
  if (!o.grid.empty()) j["grid"] = o.grid;
  j["paper_realization"] = o.paper_realization;
  if (!o.target.empty()) j["target_output"] = o.target;
  if (o.tabulated_gains) j["tabulated_gains"] = true;
  return j;
}

ManifestInfo manifest_info(const std::string& command, const Options& o,
                           const config::Config& cfg) {
  return {command, o.config.empty() ? "<default>" : o.config, cfg.master_seed, arguments_json(o)};
}

std::vector<double> sweep_grid(const config::Config& cfg) {
  return cfg.sweep.grid.empty() ? covariance::uniform_grid(cfg.sweep.points) : cfg.sweep.grid;
}

Design resolve_design(const config::Config& cfg, bool tabulated) {
  if (!tabulated) return make_design(cfg);
  if (cfg.plant.kind != config::PlantKind::homodyne) {
    throw ConfigError("--tabulated-gains needs the homodyne plant");
  }
  config::Config paper = cfg;
  paper.delay.realization = config::RealizationKind::paper;
  Design d;
  d.model = config::build_model(paper);
  d.solution = homodyne::reference::tabulated_design();
  return d;
}

void require_nominal_hurwitz(const Design& d) {
  const auto& cp = d.model.compact;
  const auto loop = covariance::build_closed_loop(cp, d.solution,
                                                  covariance::structured_delta(cp, 0.0, 0.0));
  const double a = numkernel::spectral_abscissa(loop.Abold);
  if (!(a < 0.0)) {
    throw UnstableError("covariance: nominal closed loop is not Hurwitz (spectral abscissa " +
                        fmt6(a) + ")");
  }
}

json design_summary(const Design& d) {
  return {{"point", serialize::to_json(d.solution.point)},
          {"cost_bound", d.solution.Vtau},
          {"tabulated", d.solution.Y.size() == 0}};
}

std::string lambda_text(const Vector& l) {
  std::string s;
  for (Eigen::Index i = 0; i < l.size(); ++i) s += (i ? ", " : "") + fmt6(l(i));
  return "(" + s + ")";
}

int cmd_synth(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto d = make_design(cfg);
  json j;
  j["command"] = "synth";
  j["configuration"] = describe_config(cfg);
  j["design"] = design_json(d);
  j["certificate"] = certify(d.model, d.solution);
  ArtifactSet art(o.out_dir);
  art.add("synthesis.json", serialize::dump(j));
  art.commit(manifest_info("synth", o, cfg));
  out << "cost bound V = " << fmt6(d.solution.Vtau) << "\n"
      << "tau = " << fmt6(d.solution.point.tau) << ", lambda = "
      << lambda_text(d.solution.point.lambda) << "\n"
      << "certificate: " << (j["certificate"]["passed"].get<bool>() ? "passed" : "failed")
      << "\n";
  return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto d = resolve_design(cfg, o.tabulated_gains);
  require_nominal_hurwitz(d);
  const double lag = config::simulation_config(cfg).delta;
  const auto rows = covariance::delta_sweep(d.model.compact, d.solution, sweep_grid(cfg), lag,
                                            cfg.sweep.noise, cfg.sweep.delta1);
  std::ostringstream csv;
  serialize::write_sweep_csv(csv, rows);
  json j;
  j["command"] = "sweep";
  j["configuration"] = describe_config(cfg);
  j["design"] = design_summary(d);
  j["noise_model"] = config::to_string(cfg.sweep.noise);
  j["delta1"] = cfg.sweep.delta1;
  j["smoothing_lag"] = lag;
  j["pf_estimator"] = "filtered estimate C_c xhat of the same closed loop; delay states present";
  j["rows"] = serialize::to_json(rows);
  ArtifactSet art(o.out_dir);
  art.add("sweep.csv", csv.str());
  art.add("sweep.json", serialize::dump(j));
  art.commit(manifest_info("sweep", o, cfg));
  out << "delta2        psa           pf            hurwitz\n";
  for (const auto& r : rows) {
    char line[96];
    std::snprintf(line, sizeof line, "%-13s %-13s %-13s %d\n", fmt6(r.delta2).c_str(),
                  fmt6(r.psa).c_str(), fmt6(r.pf).c_str(), r.hurwitz ? 1 : 0);
    out << line;
  }
  return kOk;
}

int cmd_mc(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = load(o);
  const auto d = resolve_design(cfg, o.tabulated_gains);
  require_nominal_hurwitz(d);
  const auto sc = config::simulation_config(cfg);
  sim::validate(sc);
  err << "mc: " << sc.runs << " runs, dt " << fmt6(sc.dt) << ", horizon " << fmt6(sc.horizon)
      << "\n";
  const auto runs = sim::run_ensemble(sc, sim::loop_gains(d.solution, d.model.compact));
  const auto sm = sim::summarize(runs, sim::Estimator::smoother);
  const auto ng = sim::summarize(runs, sim::Estimator::ngcf);
  json j;
  j["command"] = "mc";
  j["configuration"] = describe_config(cfg);
  j["design"] = design_summary(d);
  j["simulation"] = {{"dt", sc.dt},
                     {"horizon", sc.horizon},
                     {"delta", sc.delta},
                     {"runs", sc.runs},
                     {"seed", sc.master_seed},
                     {"measurement", sc.measurement == sim::Measurement::sine ? "sine" : "linear"},
                     {"smoother_target",
                      sc.target == sim::SmootherTarget::delayed ? "delayed" : "undelayed"}};
  j["normalization"] =
      "error covariance is the mean of squared terminal errors over completed runs; the "
      "standard error is the sample standard deviation of the squared errors over sqrt(runs)";
  j["smoother"] = serialize::to_json(sm);
  j["ngcf"] = serialize::to_json(ng);
  j["ratio_ngcf_over_smoother"] = ng.error_covariance / sm.error_covariance;
  std::ostringstream csv;
  serialize::write_errors_csv(csv, runs);
  ArtifactSet art(o.out_dir);
  art.add("mc.json", serialize::dump(j));
  art.add("errors.csv", csv.str());
  art.commit(manifest_info("mc", o, cfg));
  out << "smoother: " << fmt6(sm.error_covariance) << " +/- " << fmt6(sm.standard_error)
      << " (" << sm.runs_completed << "/" << sm.runs_requested << " runs)\n"
      << "ngcf:     " << fmt6(ng.error_covariance) << " +/- " << fmt6(ng.standard_error) << "\n"
      << "ratio:    " << fmt6(ng.error_covariance / sm.error_covariance) << "\n";
  return kOk;
}

int cmd_reproduce(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = load(o);
  ReproduceOptions ro;
  ro.runs = cfg.simulation.runs;
  ro.grid = cfg.sweep.grid;
  ro.threads = cfg.simulation.threads;
  const auto r = reproduce_paper(cfg, ro, err);
  ArtifactSet art(o.out_dir);
  art.add("reproduce.json", serialize::dump(r.report));
  art.add("sweep.csv", r.sweep_csv);
  art.add("errors.csv", r.errors_csv);
  art.commit(manifest_info("reproduce-paper", o, cfg));
  for (const auto& c : r.report["checks"]) {
    out << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["id"].get<std::string>() << ": "
        << c["description"].get<std::string>() << "\n";
  }
  out << r.checks_passed << " passed, " << r.checks_failed << " failed\n";
  return kOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto sc = config::simulation_config(cfg);
  sim::validate(sc);
  const auto model = config::build_model(cfg);
  const auto& cp = model.compact;
  const auto init = config::initial_point(cfg, model);
  const auto f = synthesis::feasible(init, cp);
  out << "configuration " << cfg.source << " is valid\n"
      << "state dimension " << cp.n() << " (plant " << cp.nbar << ", delay " << cp.na << ")\n"
      << "uncertainty channels " << cp.k() << ", nonlinearities " << cp.g() << "\n"
      << "lambda_min(Dbar21 Dbar21^T) = " << fmt6(cp.d0) << "\n"
      << "initial point tau = " << fmt6(init.tau) << ", lambda = " << lambda_text(init.lambda)
      << (f.feasible ? " (feasible" : " (infeasible") << ", margin " << fmt6(f.margin) << ")\n";
  return kOk;
}

int report(std::ostream& err, const std::string& command, const char* kind, const char* what,
           int code) {
  err << "rfls " << command << ": " << kind << ": " << what << "\n";
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust finite-lag smoothing toolkit", "rfls"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", toolkit_version());

  Options o;
  std::uint64_t seed = 0;
  int runs = 0;
  int threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed for every random stream");
  auto* runs_opt = app.add_option("--runs", runs, "Monte Carlo run count");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--config", o.config, "configuration file")->check(CLI::ExistingFile);
  app.add_option("--grid", o.grid, "uncertainty grid: a point count or a comma-separated list");
  app.add_flag("--paper-realization", o.paper_realization,
               "use the tabulated delay realization");
  app.add_option("--out-dir", o.out_dir, "artifact directory")->capture_default_str();
  app.add_option("--target-output", o.target, "smoothed output definition")
      ->check(CLI::IsMember({"printed", "delayed"}));
  app.add_flag("--tabulated-gains", o.tabulated_gains,
               "sweep and mc: use the tabulated estimator instead of synthesising one");

  std::string command;
  auto sub = [&](const char* name, const char* help) {
    app.add_subcommand(name, help)->callback([&command, name] { command = name; });
  };
  sub("synth", "synthesise the estimator and write synthesis.json");
  sub("sweep", "error covariances over the uncertainty grid");
  sub("mc", "Monte Carlo estimate of the terminal error covariances");
  sub("reproduce-paper", "recompute and compare every tabulated quantity of the example");
  sub("validate", "check a configuration without writing artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }
  if (*seed_opt) o.seed = seed;
  if (*runs_opt) o.runs = runs;
  if (*threads_opt) o.threads = threads;

  try {
    if (command == "synth") return cmd_synth(o, out);
    if (command == "sweep") return cmd_sweep(o, out);
    if (command == "mc") return cmd_mc(o, out, err);
    if (command == "reproduce-paper") return cmd_reproduce(o, out, err);
    if (command == "validate") return cmd_validate(o, out);
    return report(err, command, "error", "unknown command", kConfig);
  } catch (const ConfigError& e) {
    return report(err, command, "configuration error", e.what(), kConfig);
  } catch (const DomainError& e) {
    return report(err, command, "configuration error", e.what(), kConfig);
  } catch (const InfeasibleError& e) {
    return report(err, command, "infeasible", e.what(), kInfeasible);
  } catch (const NumericalError& e) {
    return report(err, command, "numerical failure", e.what(), kNumerical);
  } catch (const UnstableError& e) {
    return report(err, command, "unstable closed loop", e.what(), kUnstable);
  } catch (const std::exception& e) {
    return report(err, command, "error", e.what(), kFailure);
  }
}

}  // namespace rfls::cli
