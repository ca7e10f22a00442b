#include "cli/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rfls/covariance.hpp"
#include "rfls/errors.hpp"
#include "rfls/numkernel.hpp"

namespace rfls::cli {

using serialize::json;

Design make_design(const config::Config& cfg) {
  Design d;
  d.model = config::build_model(cfg);
  const auto init = config::initial_point(cfg, d.model);
  const auto oo = config::optimizer_options(cfg);
  if (cfg.synthesis.optimize) {
    d.optimization = synthesis::minimize_bound(d.model.compact, init, oo);
    d.solution = d.optimization->best;
  } else {
    d.solution = synthesis::synthesize(d.model.compact, init, oo.synthesis);
  }
  return d;
}

json certify(const config::Model& model, const synthesis::SynthesisSolution& s,
             double residual_tol) {
  const auto& cp = model.compact;
  const double minY = s.Y.size() ? numkernel::min_symmetric_eigenvalue(s.Y) : NAN;
  const double minX = s.X.size() ? numkernel::min_symmetric_eigenvalue(s.X) : NAN;
  const auto nominal = covariance::build_closed_loop(
      cp, s, covariance::structured_delta(cp, 0.0, 0.0));
  const double abscissa = numkernel::spectral_abscissa(nominal.Abold);
  const double xfloor = -1e-10 * std::max(1.0, s.X.size() ? s.X.norm() : 1.0);

  json j;
  j["scaled_residual_Y"] = s.scaled_residual_Y;
  j["scaled_residual_X"] = s.scaled_residual_X;
  j["residual_tolerance"] = residual_tol;
  j["min_eig_Y"] = minY;
  j["min_eig_X"] = minX;
  j["rho_YX"] = s.rhoYX;
  j["tau"] = s.point.tau;
  j["nominal_abscissa"] = abscissa;
  const bool ok = s.scaled_residual_Y <= residual_tol && s.scaled_residual_X <= residual_tol &&
                  minY > 0.0 && minX >= xfloor && s.rhoYX < s.point.tau && abscissa < 0.0;
  j["passed"] = ok;
  return j;
}

json describe_config(const config::Config& cfg) {
  json j;
  j["source"] = cfg.source;
  j["seed"] = cfg.master_seed;
  j["plant"] = cfg.plant.kind == config::PlantKind::homodyne ? "homodyne" : "matrices";
  if (cfg.plant.kind == config::PlantKind::homodyne) {
    const auto& h = cfg.plant.homodyne;
    j["homodyne"] = {{"lambda", h.lambda}, {"kappa", h.kappa}, {"alpha", h.alpha},
                     {"beta", h.beta},     {"gamma", h.gamma}};
  }
  j["delay"] = {{"order", cfg.delay.order},
                {"delta", cfg.delay.delta},
                {"realization", config::to_string(cfg.delay.realization)}};
  j["target_output"] = config::to_string(cfg.synthesis.target);
  j["optimize"] = cfg.synthesis.optimize;
  return j;
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.find(',') == std::string::npos) {
    std::size_t used = 0;
    int points = 0;
    try {
      points = std::stoi(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == text.size() && text.find('.') == std::string::npos && points >= 1) {
      return covariance::uniform_grid(points);
    }
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size()) {
      throw ConfigError("--grid must be a point count or a comma-separated list (got '" + text +
                        "')");
    }
    if (!(v >= -1.0 && v <= 0.0)) throw ConfigError("--grid values must lie in [-1, 0]");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--grid is empty");
  return out;
}

json design_json(const Design& d) {
  json j = serialize::to_json(d.solution);
  if (d.optimization) {
    j["optimization"] = {{"best_start", d.optimization->best_start},
                         {"evaluations", d.optimization->evaluations}};
  }
  return j;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace rfls::cli
