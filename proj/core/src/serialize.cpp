#include "rfls/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "rfls/errors.hpp"

namespace rfls::serialize {
namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(number(m(r, c)));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw ConfigError("matrix JSON needs rows, cols and data");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() ||
      static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ConfigError("matrix JSON data length does not match rows x cols");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = data[static_cast<std::size_t>(r * cols + c)];
      m(r, c) = v.is_null() ? std::nan("") : v.get<double>();
    }
  }
  return m;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

json to_json(const synthesis::ScalingPoint& p) {
  return json{{"tau", number(p.tau)}, {"lambda", to_json(p.lambda)}};
}

json to_json(const synthesis::SynthesisSolution& s) {
  json j;
  j["point"] = to_json(s.point);
  j["cost_bound"] = number(s.Vtau);
  j["rho_YX"] = number(s.rhoYX);
  j["residual_Y"] = number(s.residual_Y);
  j["residual_X"] = number(s.residual_X);
  j["scaled_residual_Y"] = number(s.scaled_residual_Y);
  j["scaled_residual_X"] = number(s.scaled_residual_X);
  j["plant_states"] = s.nbar;
  j["delay_states"] = s.na;
  j["Y"] = to_json(s.Y);
  j["X"] = to_json(s.X);
  j["Ac"] = to_json(s.Ac);
  j["Bc_tilde"] = to_json(s.Bc_tilde);
  j["Cc_tilde"] = to_json(s.Cc_tilde);
  return j;
}

json to_json(const synthesis::OptimizationResult& r) {
  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back(json{{"start", t.start},
                         {"stage", t.stage},
                         {"tau", number(t.tau)},
                         {"lambda", to_json(t.lambda)},
                         {"value", number(t.value)}});
  }
  return json{{"best_start", r.best_start},
              {"evaluations", r.evaluations},
              {"solution", to_json(r.best)},
              {"trace", trace}};
}

json to_json(const covariance::CovarianceReport& r) {
  return json{{"delta2", number(r.delta2)},
              {"Psa", to_json(r.Psa)},
              {"Pf", to_json(r.Pf)},
              {"lyapunov_residual", number(r.lyapunov_residual)},
              {"P", to_json(r.P)},
              {"Phi", to_json(r.Phi)}};
}

json to_json(const std::vector<covariance::SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back(json{{"delta2", number(r.delta2)},
                       {"psa", number(r.psa)},
                       {"pf", number(r.pf)},
                       {"hurwitz", r.hurwitz},
                       {"abscissa", number(r.abscissa)}});
  }
  return out;
}

json to_json(const sim::MonteCarloReport& r, bool include_errors) {
  json j{{"estimator", r.estimator == sim::Estimator::ngcf ? "ngcf" : "smoother"},
         {"error_covariance", number(r.error_covariance)},
         {"standard_error", number(r.standard_error)},
         {"mean_error", number(r.mean_error)},
         {"runs_requested", r.runs_requested},
         {"runs_completed", r.runs_completed},
         {"runs_divergent", r.runs_divergent},
         {"healthy", r.healthy},
         {"sector_violation_steps", r.sector_violations}};
  if (include_errors) {
    json e = json::array();
    for (double v : r.errors) e.push_back(number(v));
    j["errors"] = e;
  }
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_sweep_csv(std::ostream& os, const std::vector<covariance::SweepRow>& rows) {
  os << "delta2,psa,pf,hurwitz\n";
  for (const auto& r : rows) {
    os << format_number(r.delta2) << ',' << format_number(r.psa) << ',' << format_number(r.pf)
       << ',' << (r.hurwitz ? "true" : "false") << '\n';
  }
}

void write_errors_csv(std::ostream& os, const std::vector<sim::RunResult>& runs) {
  os << "run,filter_error,smoother_error,divergent\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    os << i << ',' << format_number(runs[i].filter_error) << ','
       << format_number(runs[i].smoother_error) << ',' << (runs[i].divergent ? "true" : "false")
       << '\n';
  }
}

}  // namespace rfls::serialize
