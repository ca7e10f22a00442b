#pragma once

// JSON and CSV encodings of the toolkit's results. Matrices are written as
// {"rows", "cols", "data"} with data in row-major order; floating-point values
// round-trip exactly.

#include <ostream>
#include <string>
#include <vector>

#include "rfls/covariance.hpp"
#include "rfls/sim.hpp"
#include "rfls/synthesis.hpp"
#include "rfls/third_party/json.hpp"
#include "rfls/types.hpp"

namespace rfls::serialize {

using json = nlohmann::ordered_json;

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json to_json(const Vector& v);

json to_json(const synthesis::ScalingPoint& p);
json to_json(const synthesis::SynthesisSolution& s);
json to_json(const synthesis::OptimizationResult& r);
json to_json(const covariance::CovarianceReport& r);
json to_json(const std::vector<covariance::SweepRow>& rows);
/// Per-run errors are omitted unless include_errors is set.
json to_json(const sim::MonteCarloReport& r, bool include_errors = false);

/// Two-space indented JSON with a trailing newline.
std::string dump(const json& j);

/// Number formatting shared by the CSV writers (17 significant digits,
/// "nan" for NaN).
std::string format_number(double v);

/// Header `delta2,psa,pf,hurwitz`.
void write_sweep_csv(std::ostream& os, const std::vector<covariance::SweepRow>& rows);
/// Header `run,filter_error,smoother_error,divergent`.
void write_errors_csv(std::ostream& os, const std::vector<sim::RunResult>& runs);

}  // namespace rfls::serialize
