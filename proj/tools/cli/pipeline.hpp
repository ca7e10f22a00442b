#pragma once

// Shared steps of the commands: design synthesis from a configuration, the
// invariant certificate of a design, and JSON summaries of the inputs.

#include <optional>
#include <string>
#include <vector>

#include "rfls/config.hpp"
#include "rfls/serialize.hpp"

namespace rfls::cli {

struct Design {
  config::Model model;
  synthesis::SynthesisSolution solution;
  std::optional<synthesis::OptimizationResult> optimization;
};

/// Minimises the bound when [synthesis].optimize is set, otherwise
/// synthesizes at the configured point.
Design make_design(const config::Config& cfg);

/// Residuals, Y ≻ 0, X ⪰ 0, ρ(YX) < τ̄ and a Hurwitz nominal closed loop.
/// The object carries "passed".
serialize::json certify(const config::Model& model, const synthesis::SynthesisSolution& s,
                        double residual_tol = 1e-8);

serialize::json describe_config(const config::Config& cfg);

/// "21" gives a uniform grid of 21 points on [-1, 0]; "0,-0.5,-1" lists the
/// points. Throws ConfigError on anything else.
std::vector<double> parse_grid(const std::string& text);

/// Design summary with the scaling point, cost bound and gains.
serialize::json design_json(const Design& d);

/// Human summary formatting (6 significant digits).
std::string fmt6(double v);

}  // namespace rfls::cli
