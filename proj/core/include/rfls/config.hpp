#pragma once

// Run configuration: a small TOML subset (tables, key = value, numbers,
// booleans, strings, nested arrays, # comments) mapped onto typed sections,
// plus assembly of the model pipeline it describes.

#include <cstdint>
#include <string>
#include <vector>

#include "rfls/covariance.hpp"
#include "rfls/delay.hpp"
#include "rfls/homodyne.hpp"
#include "rfls/model.hpp"
#include "rfls/sim.hpp"
#include "rfls/synthesis.hpp"

namespace rfls::config {

enum class PlantKind { homodyne, matrices };
/// `paper` selects the tabulated second-order realization of the example.
enum class RealizationKind { balanced, companion, paper };

struct PlantSection {
  PlantKind kind = PlantKind::homodyne;
  homodyne::Parameters homodyne;
  UncertainPlant matrices;  ///< used when kind == matrices
};

struct DelaySection {
  int order = 2;
  double delta = 3.1e-6;
  RealizationKind realization = RealizationKind::balanced;
};

struct SynthesisSection {
  synthesis::ScalingPoint point{1.13e-6, Vector()};
  bool optimize = false;
  synthesis::OptimizerOptions optimizer;
  Matrix J21;  ///< empty: identity
  double d0 = 1e-12;
  synthesis::TargetOutput target = synthesis::TargetOutput::printed;
};

struct SweepSection {
  std::vector<double> grid;  ///< empty: uniform grid of `points`
  int points = 21;
  double delta1 = 0.0;
  covariance::NoiseModel noise = covariance::NoiseModel::printed;
};

struct Config {
  std::string source;  ///< file path or "<string>"
  /// Every random stream (optimizer starts, Monte Carlo runs) derives from it.
  std::uint64_t master_seed = 42;
  PlantSection plant;
  DelaySection delay;
  SynthesisSection synthesis;
  sim::SimConfig simulation;
  /// When false the simulation lag follows [delay].delta.
  bool simulation_delta_set = false;
  SweepSection sweep;
};

/// Parses configuration text. Unknown sections or keys, wrong value types and
/// malformed syntax throw ConfigError with a line reference.
Config parse_config(const std::string& text, const std::string& source = "<string>");
Config load_config(const std::string& path);

/// Defaults matching the homodyne example.
Config default_config();

/// Every stage of the model pipeline described by a configuration.
struct Model {
  UncertainPlant plant;
  DelayModel delay;
  AugmentedPlant augmented;
  CompactPlant compact;
};

/// Validates the plant and assembles delay, augmentation and compact form.
/// Throws ConfigError on any violation.
Model build_model(const Config& cfg);

/// (τ̄, λ) from the configuration; λ defaults to the tabulated multipliers
/// for the homodyne example and to 0.5 on every coordinate otherwise.
synthesis::ScalingPoint initial_point(const Config& cfg, const Model& model);

/// Optimizer settings with the seed derived from the master seed.
synthesis::OptimizerOptions optimizer_options(const Config& cfg);

/// Simulation settings with the master seed and, for a homodyne plant, its
/// physical parameters copied in.
sim::SimConfig simulation_config(const Config& cfg);

const char* to_string(synthesis::TargetOutput t);
const char* to_string(RealizationKind r);
const char* to_string(covariance::NoiseModel n);
const char* to_string(sim::Estimator e);
synthesis::TargetOutput parse_target(const std::string& s);
RealizationKind parse_realization(const std::string& s);

}  // namespace rfls::config
