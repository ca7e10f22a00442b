#pragma once

// End-to-end reproduction of the phase-estimation example: every tabulated
// quantity recomputed and compared against its printed value.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfls/config.hpp"
#include "rfls/serialize.hpp"

namespace rfls::cli {

struct ReproduceOptions {
  int runs = 2000;
  std::vector<double> grid;  ///< empty: 21 points
  int threads = 0;
};

struct ReproduceResult {
  serialize::json report;
  std::string sweep_csv;
  std::string errors_csv;
  int checks_passed = 0;
  int checks_failed = 0;
};

/// Entrywise comparison on entries above 1e-3 of the printed matrix's
/// spectral norm. Carries "max_relative_error", "entries_compared", "passed".
serialize::json compare_matrices(const Matrix& computed, const Matrix& printed,
                                 double rel_tol = 0.05);

/// Synthesis at the tabulated scaling point with the tabulated delay
/// realization, compared with the tabulated gains. When the pipeline cannot
/// complete, the object records where and why, plus gains evaluated with the
/// control Riccati solution omitted (X = 0) as a diagnostic.
serialize::json gain_reproduction(const config::Model& paper_model,
                                  synthesis::TargetOutput target);

/// `cfg` supplies the plant and simulation settings; the delay realization is
/// overridden per section.
ReproduceResult reproduce_paper(const config::Config& cfg, const ReproduceOptions& opts,
                                std::ostream& progress);

}  // namespace rfls::cli
