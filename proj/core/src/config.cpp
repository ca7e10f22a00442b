#include "rfls/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rfls/errors.hpp"
#include "rfls/rng.hpp"

namespace rfls::config {
namespace {

// Stream index reserved for the optimizer; Monte Carlo runs use 0, 1, 2, ...
constexpr std::uint64_t kOptimizerStream = 1ULL << 63;

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// TOML subset -> json tree

class Parser {
 public:
  Parser(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_space_and_comments(true);
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        std::vector<std::string> path = dotted_key(']');
        expect(']');
        table = &root;
        for (const auto& part : path) {
          if (!table->contains(part)) (*table)[part] = json::object();
          table = &(*table)[part];
          if (!table->is_object()) fail("'" + part + "' is not a table");
        }
        if (!seen_tables_.insert(join(path)).second) fail("duplicate table [" + join(path) + "]");
      } else {
        std::vector<std::string> path = dotted_key('=');
        skip_inline_space();
        expect('=');
        skip_inline_space();
        json v = value();
        json* target = table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          if (!target->contains(path[i])) (*target)[path[i]] = json::object();
          target = &(*target)[path[i]];
        }
        if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*target)[path.back()] = std::move(v);
      }
      skip_inline_space();
      if (!at_end() && peek() == '#') skip_comment();
      if (!at_end() && peek() != '\n' && peek() != '\r') fail("unexpected trailing characters");
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line()) + ": " + msg);
  }

  int line() const {
    int l = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) l += text_[i] == '\n';
    return l;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_comment() {
    while (!at_end() && peek() != '\n') ++pos_;
  }

  void skip_inline_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_space_and_comments(bool newlines) {
    while (!at_end()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || (newlines && (c == '\n' || c == '\r'))) {
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  std::vector<std::string> dotted_key(char terminator) {
    std::vector<std::string> parts;
    while (true) {
      skip_inline_space();
      std::string part;
      if (!at_end() && peek() == '"') {
        part = string_literal();
      } else {
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                             peek() == '-')) {
          part += peek();
          ++pos_;
        }
      }
      if (part.empty()) fail("expected a key");
      parts.push_back(part);
      skip_inline_space();
      if (!at_end() && peek() == '.') {
        ++pos_;
        continue;
      }
      if (at_end() || peek() != terminator) fail(std::string("expected '") + terminator + "'");
      return parts;
    }
  }

  std::string string_literal() {
    expect('"');
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = peek();
      ++pos_;
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) fail("unterminated escape");
        const char e = peek();
        ++pos_;
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  json value() {
    if (at_end()) fail("expected a value");
    const char c = peek();
    if (c == '"') return string_literal();
    if (c == '[') return array();
    if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number();
  }

  json array() {
    expect('[');
    json arr = json::array();
    while (true) {
      skip_space_and_comments(true);
      if (at_end()) fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(value());
      skip_space_and_comments(true);
      if (!at_end() && peek() == ',') {
        ++pos_;
        continue;
      }
      if (at_end()) fail("unterminated array");
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  json number() {
    std::string tok;
    while (!at_end()) {
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
          c == 'e' || c == 'E' || c == '_') {
        if (c != '_') tok += c;
        ++pos_;
      } else {
        break;
      }
    }
    if (tok.empty()) fail("expected a value");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("malformed number '" + tok + "'");
    }
    if (used != tok.size()) fail("malformed number '" + tok + "'");
    const bool integral = tok.find_first_of(".eE") == std::string::npos;
    if (integral) return static_cast<std::int64_t>(std::llround(v));
    return v;
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "." : "") + parts[i];
    return s;
  }

  const std::string& text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::set<std::string> seen_tables_;
};

// ---------------------------------------------------------------------------
// typed extraction

class Section {
 public:
  Section(const json& root, const std::string& name, const std::string& source,
          std::set<std::string> allowed)
      : name_(name), source_(source) {
    if (root.contains(name)) {
      node_ = &root.at(name);
      if (!node_->is_object()) fail("[" + name + "] must be a table");
      for (const auto& [key, v] : node_->items()) {
        if (!allowed.count(key)) fail("unknown key '" + key + "' in [" + name + "]");
      }
    }
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_number()) fail(key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key + " must be finite");
    return d;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_number_integer()) fail(key + " must be an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_boolean()) fail(key + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_string()) fail(key + " must be a string");
    return v.get<std::string>();
  }

  Vector vector(const std::string& key) const {
    if (!has(key)) return Vector();
    return to_vector(node_->at(key), key);
  }

  Matrix matrix(const std::string& key) const {
    if (!has(key)) return Matrix();
    return to_matrix(node_->at(key), key);
  }

  MatrixList matrix_list(const std::string& key) const {
    MatrixList out;
    if (!has(key)) return out;
    const auto& v = node_->at(key);
    if (!v.is_array()) fail(key + " must be an array of matrices");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(to_matrix(v[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ": [" + name_ + "] " + msg);
  }

 private:
  Vector to_vector(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key + " must be an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key + " must be an array of numbers");
      out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
  }

  Matrix to_matrix(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key + " must be a nested array (rows of numbers)");
    if (v.empty()) return Matrix();
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
      if (!v[r].is_array() || v[r].size() != cols) {
        fail(key + " must be a rectangular nested array");
      }
      for (std::size_t c = 0; c < cols; ++c) {
        if (!v[r][c].is_number()) fail(key + " entries must be numbers");
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
      }
    }
    return out;
  }

  const json* node_ = nullptr;
  std::string name_;
  std::string source_;
};

template <typename Enum>
Enum pick(const Section& sec, const std::string& key, const std::string& value,
          std::initializer_list<std::pair<const char*, Enum>> options) {
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  }
  sec.fail(key + " must be one of " + allowed + " (got '" + value + "')");
}

}  // namespace

const char* to_string(synthesis::TargetOutput t) {
  return t == synthesis::TargetOutput::delayed ? "delayed" : "printed";
}

const char* to_string(RealizationKind r) {
  switch (r) {
    case RealizationKind::balanced: return "balanced";
    case RealizationKind::companion: return "companion";
    case RealizationKind::paper: return "paper";
  }
  return "balanced";
}

const char* to_string(covariance::NoiseModel n) {
  return n == covariance::NoiseModel::physical ? "physical" : "printed";
}

const char* to_string(sim::Estimator e) { return e == sim::Estimator::ngcf ? "ngcf" : "smoother"; }

synthesis::TargetOutput parse_target(const std::string& s) {
  if (s == "printed") return synthesis::TargetOutput::printed;
  if (s == "delayed") return synthesis::TargetOutput::delayed;
  throw ConfigError("target output must be 'printed' or 'delayed' (got '" + s + "')");
}

RealizationKind parse_realization(const std::string& s) {
  if (s == "balanced") return RealizationKind::balanced;
  if (s == "companion") return RealizationKind::companion;
  if (s == "paper") return RealizationKind::paper;
  throw ConfigError("delay realization must be balanced, companion or paper (got '" + s + "')");
}

Config default_config() {
  Config cfg;
  cfg.source = "<defaults>";
  return cfg;
}

Config parse_config(const std::string& text, const std::string& source) {
  const json root = Parser(text, source).parse();
  static const std::set<std::string> sections = {"plant", "delay", "synthesis", "simulation",
                                                 "sweep"};
  for (const auto& [key, v] : root.items()) {
    if (!sections.count(key) && key != "seed") {
      throw ConfigError(source + ": unknown section or top-level key '" + key + "'");
    }
  }

  Config cfg = default_config();
  cfg.source = source;
  if (root.contains("seed")) {
    const auto& v = root.at("seed");
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(source + ": seed must be a nonnegative integer");
    }
    cfg.master_seed = v.get<std::uint64_t>();
  }

  const Section plant(root, "plant", source,
                      {"kind", "lambda", "kappa", "alpha", "beta", "gamma", "A", "B1", "Bbar1",
                       "B1s", "C0", "C1s", "Cbar1", "C2", "D21", "D21s", "Dbar21", "S",
                       "lipschitz"});
  cfg.plant.kind = pick(plant, "kind", plant.string("kind", "homodyne"),
                        {std::pair{"homodyne", PlantKind::homodyne},
                         std::pair{"matrices", PlantKind::matrices}});
  auto& hp = cfg.plant.homodyne;
  hp.lambda = plant.number("lambda", hp.lambda);
  hp.kappa = plant.number("kappa", hp.kappa);
  hp.alpha = plant.number("alpha", hp.alpha);
  hp.beta = plant.number("beta", hp.beta);
  hp.gamma = plant.number("gamma", hp.gamma);
  if (cfg.plant.kind == PlantKind::matrices) {
    auto& u = cfg.plant.matrices;
    u.A = plant.matrix("A");
    u.B1 = plant.matrix("B1");
    u.Bbar1 = plant.matrix_list("Bbar1");
    u.B1s = plant.matrix_list("B1s");
    u.C0 = plant.matrix("C0");
    u.C1s = plant.matrix_list("C1s");
    u.Cbar1 = plant.matrix_list("Cbar1");
    u.C2 = plant.matrix("C2");
    u.D21 = plant.matrix("D21");
    u.D21s = plant.matrix_list("D21s");
    u.Dbar21 = plant.matrix_list("Dbar21");
    u.S = plant.matrix_list("S");
    const Vector lip = plant.vector("lipschitz");
    u.beta.assign(lip.data(), lip.data() + lip.size());
  }

  const Section delay(root, "delay", source, {"order", "delta", "realization"});
  cfg.delay.order = static_cast<int>(delay.integer("order", cfg.delay.order));
  cfg.delay.delta = delay.number("delta", cfg.delay.delta);
  cfg.delay.realization = parse_realization(delay.string("realization", "balanced"));

  const Section syn(root, "synthesis", source,
                    {"tau", "lambda", "optimize", "starts", "tau_min", "tau_max",
                     "lambda_lo", "lambda_hi", "slack", "threads", "j21", "d0", "target_output",
                     "residual_tol", "tau_scan_points", "samples_per_node",
                     "initial_step", "min_step", "max_evaluations_per_start"});
  cfg.synthesis.point.tau = syn.number("tau", cfg.synthesis.point.tau);
  cfg.synthesis.point.lambda = syn.vector("lambda");
  cfg.synthesis.optimize = syn.boolean("optimize", false);
  auto& oo = cfg.synthesis.optimizer;
  oo.starts = static_cast<int>(syn.integer("starts", oo.starts));
  oo.tau_min = syn.number("tau_min", oo.tau_min);
  oo.tau_max = syn.number("tau_max", oo.tau_max);
  oo.lambda_lo = syn.vector("lambda_lo");
  oo.lambda_hi = syn.vector("lambda_hi");
  oo.slack = syn.number("slack", oo.slack);
  oo.threads = static_cast<int>(syn.integer("threads", oo.threads));
  oo.tau_scan_points = static_cast<int>(syn.integer("tau_scan_points", oo.tau_scan_points));
  oo.samples_per_node = static_cast<int>(syn.integer("samples_per_node", oo.samples_per_node));
  oo.initial_step = syn.number("initial_step", oo.initial_step);
  oo.min_step = syn.number("min_step", oo.min_step);
  oo.max_evaluations_per_start = static_cast<int>(
      syn.integer("max_evaluations_per_start", oo.max_evaluations_per_start));
  cfg.synthesis.J21 = syn.matrix("j21");
  cfg.synthesis.d0 = syn.number("d0", cfg.synthesis.d0);
  cfg.synthesis.target = parse_target(syn.string("target_output", "printed"));
  oo.synthesis.target = cfg.synthesis.target;
  oo.synthesis.residual_tol = syn.number("residual_tol", oo.synthesis.residual_tol);
  if (oo.starts < 1) syn.fail("starts must be >= 1");
  if (!(cfg.synthesis.point.tau > 0.0)) syn.fail("tau must be positive");

  const Section simsec(root, "simulation", source,
                       {"dt", "horizon", "delta", "runs", "estimator", "measurement",
                        "target", "measurement_noise", "nonlinearity_copy", "phi0", "threads",
                        "trajectory_stride"});
  auto& sc = cfg.simulation;
  sc.dt = simsec.number("dt", sc.dt);
  sc.horizon = simsec.number("horizon", sc.horizon);
  cfg.simulation_delta_set = simsec.has("delta");
  sc.delta = simsec.number("delta", cfg.delay.delta);
  sc.runs = static_cast<int>(simsec.integer("runs", sc.runs));
  sc.estimator = pick(simsec, "estimator", simsec.string("estimator", "smoother"),
                      {std::pair{"smoother", sim::Estimator::smoother},
                       std::pair{"ngcf", sim::Estimator::ngcf}});
  sc.measurement = pick(simsec, "measurement", simsec.string("measurement", "sine"),
                        {std::pair{"sine", sim::Measurement::sine},
                         std::pair{"linear", sim::Measurement::linear}});
  sc.target = pick(simsec, "target", simsec.string("target", "delayed"),
                   {std::pair{"delayed", sim::SmootherTarget::delayed},
                    std::pair{"undelayed", sim::SmootherTarget::undelayed}});
  sc.measurement_noise = simsec.boolean("measurement_noise", sc.measurement_noise);
  sc.nonlinearity_copy = simsec.boolean("nonlinearity_copy", sc.nonlinearity_copy);
  sc.phi0 = simsec.number("phi0", sc.phi0);
  sc.threads = static_cast<int>(simsec.integer("threads", sc.threads));
  sc.trajectory_stride = static_cast<int>(simsec.integer("trajectory_stride", 0));

  const Section sweep(root, "sweep", source, {"points", "grid", "delta1", "noise"});
  cfg.sweep.points = static_cast<int>(sweep.integer("points", cfg.sweep.points));
  const Vector grid = sweep.vector("grid");
  cfg.sweep.grid.assign(grid.data(), grid.data() + grid.size());
  cfg.sweep.delta1 = sweep.number("delta1", cfg.sweep.delta1);
  cfg.sweep.noise = pick(sweep, "noise", sweep.string("noise", "printed"),
                         {std::pair{"printed", covariance::NoiseModel::printed},
                          std::pair{"physical", covariance::NoiseModel::physical}});
  if (cfg.sweep.points < 1) sweep.fail("points must be >= 1");
  for (double d : cfg.sweep.grid) {
    if (!(d >= -1.0 && d <= 0.0)) sweep.fail("grid values must lie in [-1, 0]");
  }
  if (!(std::abs(cfg.sweep.delta1) <= 1.0)) sweep.fail("delta1 must lie in [-1, 1]");
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

Model build_model(const Config& cfg) {
  Model model;
  model.plant = cfg.plant.kind == PlantKind::homodyne ? homodyne::plant(cfg.plant.homodyne)
                                                      : cfg.plant.matrices;
  const auto problems = validate_plant(model.plant);
  if (!problems.empty()) {
    std::string msg = "plant is malformed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  const Eigen::Index channels = model.plant.m();
  if (cfg.delay.realization == RealizationKind::paper) {
    if (cfg.plant.kind != PlantKind::homodyne) {
      throw ConfigError("the paper delay realization is only defined for the homodyne plant");
    }
    model.delay = homodyne::reference::delay_model();
  } else if (cfg.delay.delta == 0.0) {
    model.delay = identity_delay(channels);
  } else {
    const auto kind = cfg.delay.realization == RealizationKind::companion
                          ? DelayRealization::companion
                          : DelayRealization::balanced;
    try {
      model.delay = pade_delay(cfg.delay.order, cfg.delay.delta, channels, kind);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("[delay] ") + e.what());
    }
  }
  model.augmented = augment_with_delay(model.plant, model.delay);
  CompactOptions co;
  co.d0 = cfg.synthesis.d0;
  model.compact = build_compact(model.augmented, model.plant, cfg.synthesis.J21, co);
  return model;
}

synthesis::ScalingPoint initial_point(const Config& cfg, const Model& model) {
  synthesis::ScalingPoint p = cfg.synthesis.point;
  const Eigen::Index nl = model.compact.ktilde();
  if (p.lambda.size() == 0) {
    if (cfg.plant.kind == PlantKind::homodyne && nl == 4) {
      p.lambda = Eigen::Map<const Vector>(homodyne::reference::lambda, 4);
    } else {
      p.lambda = Vector::Constant(nl, 0.5);
    }
  }
  if (p.lambda.size() != nl) {
    throw ConfigError("[synthesis] lambda has " + std::to_string(p.lambda.size()) +
                      " entries, expected k + 3g = " + std::to_string(nl));
  }
  return p;
}

synthesis::OptimizerOptions optimizer_options(const Config& cfg) {
  synthesis::OptimizerOptions oo = cfg.synthesis.optimizer;
  oo.seed = rng::stream_seed(cfg.master_seed, kOptimizerStream);
  oo.synthesis.target = cfg.synthesis.target;
  return oo;
}

sim::SimConfig simulation_config(const Config& cfg) {
  sim::SimConfig sc = cfg.simulation;
  sc.master_seed = cfg.master_seed;
  if (cfg.plant.kind == PlantKind::homodyne) {
    const auto& hp = cfg.plant.homodyne;
    sc.kappa = hp.kappa;
    sc.lambda_ou = hp.lambda;
    sc.alpha = hp.alpha;
    sc.beta_slope = hp.beta;
    sc.gamma = hp.gamma;
  }
  if (!cfg.simulation_delta_set) {
    sc.delta = cfg.delay.realization == RealizationKind::paper ? homodyne::reference::delta
                                                               : cfg.delay.delta;
  }
  return sc;
}

}  // namespace rfls::config
