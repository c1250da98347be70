#pragma once

// Declarative scenario files (JSON) and their evaluation into report records.
//
// A file holds either one scenario object or {"scenarios": [...]}. Every
// scenario yields one ReportRecord per requested relation; a scenario with a
// "random" block yields `count` seeded Robertson instances instead.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gur/measurement.hpp"
#include "gur/model_factory.hpp"
#include "gur/random.hpp"
#include "gur/relations.hpp"

namespace gur::cli {

using Json = nlohmann::json;

/// Malformed or inconsistent scenario input; the message carries the location.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { none, cnot, von_neumann };
enum class StateKind { basis, superposition, correlated, product };

struct StateSpec {
  StateKind kind = StateKind::basis;
  std::size_t index = 0;
  std::vector<Complex> amplitudes;
  std::vector<double> weights;
  std::vector<StateSpec> parts;
};

struct RandomSpec {
  std::size_t count = 1000;
  std::size_t min_dim = 2;
  std::size_t max_dim = 8;
};

struct Scenario {
  std::string id;
  SystemSpec system;
  std::size_t particles = 1;
  ModelKind model = ModelKind::none;
  double g = 1.0;
  std::size_t probe_levels = 0;  // 0: same as system levels
  std::string observable_a;      // empty: default pair for the system kind
  std::string observable_b;
  StateSpec state;
  std::optional<RandomSpec> random;
  std::vector<Relation> relations;
  double tolerance = kInequalityTol;
  std::uint64_t seed = 0;
};

/// Global command-line overrides.
struct Overrides {
  std::optional<double> hbar;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
};

struct ReportRecord {
  std::string scenario_id;
  Relation relation = Relation::robertson;
  std::size_t n_particles = 1;
  double g = 0.0;
  double hbar = 1.0;
  double epsilon = 0.0;
  double eta = 0.0;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool satisfied = true;
  double entropy = 0.0;
  double tolerance = 0.0;
};

namespace detail {

// JSON accessor that remembers the path for diagnostics.
class Field {
 public:
  Field(const Json& node, std::string path) : node_(node), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(path_ + ": " + what); }

  const Json& node() const { return node_; }
  const std::string& path() const { return path_; }
  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  Field at(const char* key) const {
    if (!has(key)) fail(std::string("missing field '") + key + "'");
    return Field(node_.at(key), path_ + "." + key);
  }
  Field at(std::size_t i) const { return Field(node_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!node_.is_object()) fail("expected an object");
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) fail("unknown field '" + key + "'");
    }
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    const double v = node_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  std::int64_t integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<std::int64_t>();
  }
  std::size_t count(std::int64_t min) const {
    const auto v = integer();
    if (v < min) fail("must be >= " + std::to_string(min) + ", got " + std::to_string(v));
    return static_cast<std::size_t>(v);
  }
  std::string text() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }
  std::size_t size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

 private:
  const Json& node_;
  std::string path_;
};

inline SystemKind parse_system_kind(const Field& f) {
  const auto s = f.text();
  if (s == "qubit") return SystemKind::qubit;
  if (s == "spin_j") return SystemKind::spin_j;
  if (s == "truncated_oscillator") return SystemKind::truncated_oscillator;
  if (s == "grid") return SystemKind::grid;
  f.fail("unknown system kind '" + s + "'");
}

inline Relation parse_relation(const Field& f) {
  const auto s = f.text();
  if (s == "robertson") return Relation::robertson;
  if (s == "naive_product") return Relation::naive_product;
  if (s == "ozawa") return Relation::ozawa;
  if (s == "fujikawa") return Relation::fujikawa;
  f.fail("unknown relation '" + s + "'");
}

inline Complex parse_amplitude(const Field& f) {
  if (f.node().is_number()) return Complex(f.number(), 0.0);
  if (f.size() != 2) f.fail("complex amplitudes are [re, im] pairs");
  return Complex(f.at(std::size_t{0}).number(), f.at(std::size_t{1}).number());
}

inline StateSpec parse_state(const Field& f, bool allow_composite) {
  f.require_object({"kind", "index", "amplitudes", "weights", "parts"});
  StateSpec s;
  const auto kind = f.at("kind").text();
  if (kind == "basis") {
    s.kind = StateKind::basis;
    s.index = f.has("index") ? f.at("index").count(0) : 0;
  } else if (kind == "superposition") {
    s.kind = StateKind::superposition;
    const auto amps = f.at("amplitudes");
    for (std::size_t i = 0; i < amps.size(); ++i) s.amplitudes.push_back(parse_amplitude(amps.at(i)));
    double norm = 0.0;
    for (const auto& a : s.amplitudes) norm += std::norm(a);
    if (norm == 0.0) amps.fail("amplitudes are all zero");
  } else if (kind == "correlated" && allow_composite) {
    s.kind = StateKind::correlated;
    const auto w = f.at("weights");
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double v = w.at(i).number();
      if (v < 0.0) w.at(i).fail("weights must be non-negative");
      s.weights.push_back(v);
      total += v;
    }
    if (total == 0.0) w.fail("weights are all zero");
  } else if (kind == "product" && allow_composite) {
    s.kind = StateKind::product;
    const auto parts = f.at("parts");
    for (std::size_t i = 0; i < parts.size(); ++i) s.parts.push_back(parse_state(parts.at(i), false));
    if (s.parts.empty()) parts.fail("empty part list");
  } else {
    f.at("kind").fail("unsupported state kind '" + kind + "'");
  }
  return s;
}

inline Scenario parse_scenario(const Field& f) {
  f.require_object({"id", "system", "particles", "model", "observables", "state", "random", "relations", "hbar",
                    "tolerance", "seed"});
  Scenario s;
  s.id = f.at("id").text();
  if (s.id.empty()) f.at("id").fail("must be non-empty");

  if (f.has("hbar")) {
    s.system.hbar = f.at("hbar").number();
    if (!(s.system.hbar > 0.0)) f.at("hbar").fail("must be positive");
  }
  if (f.has("tolerance")) {
    s.tolerance = f.at("tolerance").number();
    if (s.tolerance < 0.0) f.at("tolerance").fail("must be non-negative");
  }
  if (f.has("seed")) s.seed = static_cast<std::uint64_t>(f.at("seed").count(0));

  if (f.has("relations")) {
    const auto rel = f.at("relations");
    for (std::size_t i = 0; i < rel.size(); ++i) {
      const Relation r = parse_relation(rel.at(i));
      for (Relation seen : s.relations)
        if (seen == r) rel.at(i).fail("duplicate relation");
      s.relations.push_back(r);
    }
    if (s.relations.empty()) rel.fail("empty relation set");
  }

  if (f.has("random")) {
    const auto r = f.at("random");
    r.require_object({"count", "min_dim", "max_dim"});
    RandomSpec spec;
    if (r.has("count")) spec.count = r.at("count").count(1);
    if (r.has("min_dim")) spec.min_dim = r.at("min_dim").count(2);
    if (r.has("max_dim")) spec.max_dim = r.at("max_dim").count(2);
    if (spec.max_dim < spec.min_dim) r.fail("max_dim < min_dim");
    if (spec.max_dim > kMaxTotalDim) r.at("max_dim").fail("exceeds the dimension cap");
    s.random = spec;
    if (s.relations.empty()) s.relations = {Relation::robertson};
    for (Relation rel : s.relations)
      if (rel != Relation::robertson) f.at("relations").fail("random scenarios support robertson only");
    for (const char* key : {"system", "model", "state", "particles", "observables"})
      if (f.has(key)) f.at(key).fail("not allowed together with 'random'");
    return s;
  }

  const auto sys = f.at("system");
  sys.require_object({"kind", "levels", "grid_spacing"});
  s.system.kind = parse_system_kind(sys.at("kind"));
  s.system.levels = sys.has("levels") ? sys.at("levels").count(2) : 2;
  if (s.system.kind == SystemKind::qubit && s.system.levels != 2) sys.at("levels").fail("qubit systems have 2 levels");
  if (sys.has("grid_spacing")) {
    s.system.grid_spacing = sys.at("grid_spacing").number();
    if (!(s.system.grid_spacing > 0.0)) sys.at("grid_spacing").fail("must be positive");
  }
  if (f.has("particles")) s.particles = f.at("particles").count(1);

  if (f.has("model")) {
    const auto m = f.at("model");
    m.require_object({"kind", "g", "probe_levels"});
    const auto kind = m.at("kind").text();
    if (kind == "cnot") {
      s.model = ModelKind::cnot;
      if (s.system.levels != 2) m.at("kind").fail("cnot needs a 2-level system");
      if (m.has("g") || m.has("probe_levels")) m.fail("cnot takes no coupling or probe size");
    } else if (kind == "von_neumann") {
      s.model = ModelKind::von_neumann;
      s.g = m.at("g").number();
      if (s.g == 0.0) m.at("g").fail("coupling must be non-zero");
      if (m.has("probe_levels")) s.probe_levels = m.at("probe_levels").count(2);
    } else {
      m.at("kind").fail("unknown model kind '" + kind + "'");
    }
  }

  if (f.has("observables")) {
    const auto o = f.at("observables");
    o.require_object({"a", "b"});
    if (o.has("a")) s.observable_a = o.at("a").text();
    if (o.has("b")) s.observable_b = o.at("b").text();
  }

  s.state = parse_state(f.at("state"), true);
  if (s.state.kind == StateKind::product && s.state.parts.size() != s.particles)
    f.at("state").at("parts").fail("needs one part per particle");
  if (s.state.kind == StateKind::correlated && s.state.weights.size() > s.system.levels)
    f.at("state").at("weights").fail("more weights than levels");

  if (s.relations.empty())
    s.relations = s.model == ModelKind::none
                      ? std::vector<Relation>{Relation::robertson}
                      : std::vector<Relation>{Relation::robertson, Relation::naive_product, Relation::ozawa,
                                              Relation::fujikawa};
  if (s.model == ModelKind::none)
    for (Relation r : s.relations)
      if (r != Relation::robertson) f.at("relations").fail(to_string(r) + " needs a measurement model");
  return s;
}

}  // namespace detail

inline std::vector<Scenario> parse_scenarios(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(e.what());
  }
  std::vector<Scenario> out;
  const detail::Field top(root, "$");
  if (root.is_object() && root.contains("scenarios")) {
    top.require_object({"scenarios"});
    const auto list = top.at("scenarios");
    for (std::size_t i = 0; i < list.size(); ++i) out.push_back(detail::parse_scenario(list.at(i)));
  } else {
    out.push_back(detail::parse_scenario(top));
  }
  if (out.empty()) throw ScenarioError("$: no scenarios");
  std::set<std::string> ids;
  for (const auto& s : out)
    if (!ids.insert(s.id).second) throw ScenarioError("$: duplicate scenario id '" + s.id + "'");
  return out;
}

inline std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenarios(buf.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

/// Scaling experiment configuration file: {"id", "levels", "weights", "n_max", "g", "probe_levels", "hbar", "tolerance"}.
inline ScalingConfig parse_scaling_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(e.what());
  }
  const detail::Field f(root, "$");
  f.require_object({"id", "levels", "weights", "n_max", "g", "probe_levels", "hbar", "tolerance"});
  ScalingConfig cfg;
  if (f.has("levels")) cfg.system.levels = f.at("levels").count(2);
  if (f.has("weights")) {
    const auto w = f.at("weights");
    cfg.weights.clear();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double v = w.at(i).number();
      if (v < 0.0) w.at(i).fail("weights must be non-negative");
      cfg.weights.push_back(v);
    }
    if (cfg.weights.size() > cfg.system.levels) w.fail("more weights than levels");
  }
  if (f.has("n_max")) cfg.n_max = f.at("n_max").count(1);
  if (f.has("g")) {
    cfg.g = f.at("g").number();
    if (cfg.g == 0.0) f.at("g").fail("coupling must be non-zero");
  }
  if (f.has("probe_levels")) cfg.probe_levels = f.at("probe_levels").count(2);
  if (f.has("hbar")) {
    cfg.system.hbar = f.at("hbar").number();
    if (!(cfg.system.hbar > 0.0)) f.at("hbar").fail("must be positive");
  }
  if (f.has("tolerance")) {
    cfg.tolerance = f.at("tolerance").number();
    if (cfg.tolerance < 0.0) f.at("tolerance").fail("must be non-negative");
  }
  return cfg;
}

inline void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.hbar) s.system.hbar = *o.hbar;
  if (o.tolerance) s.tolerance = *o.tolerance;
  if (o.seed) s.seed = *o.seed;
}

namespace detail {

inline Operator named_observable(const std::string& name, const SystemSpec& sys) {
  const std::string where = "observable '" + name + "'";
  if (name == "q" || name == "p") {
    if (sys.kind != SystemKind::truncated_oscillator) throw ScenarioError(where + " needs a truncated_oscillator");
    const auto pair = truncated_oscillator(sys.levels, sys.hbar);
    return name == "q" ? pair.q : pair.p;
  }
  if (name == "sigma_x" || name == "sigma_y" || name == "sigma_z") {
    if (sys.levels != 2) throw ScenarioError(where + " needs a 2-level system");
    return name == "sigma_x" ? sigma_x() : name == "sigma_y" ? sigma_y() : sigma_z();
  }
  if (name == "jx" || name == "jy" || name == "jz") {
    if (sys.kind != SystemKind::spin_j) throw ScenarioError(where + " needs a spin_j system");
    const auto s = spin_ops(0.5 * static_cast<double>(sys.levels - 1));
    return sys.hbar * (name == "jx" ? s.jx : name == "jy" ? s.jy : s.jz);
  }
  if (name == "x") {
    if (sys.kind != SystemKind::grid) throw ScenarioError(where + " needs a grid system");
    return grid_position(sys.levels, sys.grid_spacing);
  }
  throw ScenarioError("unknown " + where);
}

inline StateVector single_state(const StateSpec& spec, const Dim& dim, const std::string& id) {
  switch (spec.kind) {
    case StateKind::basis:
      if (spec.index >= dim.total())
        throw ScenarioError(id + ": basis index " + std::to_string(spec.index) + " out of range");
      return StateVector::basis(dim, spec.index);
    case StateKind::superposition: {
      if (spec.amplitudes.size() != dim.total())
        throw ScenarioError(id + ": " + std::to_string(spec.amplitudes.size()) + " amplitudes for dimension " +
                            std::to_string(dim.total()));
      Vector v(static_cast<Eigen::Index>(dim.total()));
      for (std::size_t i = 0; i < spec.amplitudes.size(); ++i) v(static_cast<Eigen::Index>(i)) = spec.amplitudes[i];
      return StateVector(dim, std::move(v));
    }
    default:
      throw ScenarioError(id + ": composite state kinds cannot be nested");
  }
}

inline StateVector system_state(const Scenario& s) {
  const Dim dims = Dim::repeated(s.system.levels, s.particles);
  switch (s.state.kind) {
    case StateKind::correlated:
      return correlated_state(s.state.weights, s.particles, s.system.levels);
    case StateKind::product: {
      std::vector<StateVector> parts;
      for (const auto& p : s.state.parts) parts.push_back(single_state(p, Dim{s.system.levels}, s.id));
      return product_state(parts);
    }
    default:
      return single_state(s.state, dims, s.id);
  }
}

inline double entropy_of(const StateVector& psi) {
  if (psi.dim().rank() < 2) return 0.0;
  return vn_entropy(partial_trace(psi, {0}));
}

inline ReportRecord record_from(const Scenario& s, const RelationReport& r, const NoiseReport& noise, double entropy) {
  ReportRecord rec;
  rec.scenario_id = s.id;
  rec.relation = r.relation;
  rec.n_particles = s.particles;
  rec.g = s.model == ModelKind::von_neumann ? s.g : 0.0;
  rec.hbar = s.system.hbar;
  rec.epsilon = noise.epsilon;
  rec.eta = noise.eta;
  rec.sigma_a = noise.sigma_a;
  rec.sigma_b = noise.sigma_b;
  rec.lhs = r.lhs;
  rec.rhs = r.rhs;
  rec.margin = r.margin;
  rec.satisfied = r.satisfied;
  rec.entropy = entropy;
  rec.tolerance = r.tolerance;
  return rec;
}

inline std::vector<ReportRecord> evaluate_random(const Scenario& s) {
  std::mt19937_64 rng(s.seed);
  std::uniform_int_distribution<std::size_t> pick(s.random->min_dim, s.random->max_dim);
  std::vector<ReportRecord> out;
  out.reserve(s.random->count);
  for (std::size_t i = 0; i < s.random->count; ++i) {
    const std::size_t d = pick(rng);
    const Operator a = random_hermitian(d, rng);
    const Operator b = random_hermitian(d, rng);
    const StateVector psi = random_state(Dim{d}, rng);
    const auto report = robertson_check(a, b, psi, s.tolerance, s.id);
    NoiseReport noise;
    noise.sigma_a = std_dev(a, psi);
    noise.sigma_b = std_dev(b, psi);
    ReportRecord rec = record_from(s, report, noise, 0.0);
    std::ostringstream id;
    id << s.id << '#' << i;
    rec.scenario_id = id.str();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

/// Evaluates one scenario. Throws ScenarioError / StructuralError / ContractError.
inline std::vector<ReportRecord> evaluate(const Scenario& s) {
  if (s.random) return detail::evaluate_random(s);
  s.system.validate();

  const std::size_t probe_levels = s.probe_levels == 0 ? s.system.levels : s.probe_levels;
  const std::size_t probe_per_particle = s.model == ModelKind::none ? 1 : (s.model == ModelKind::cnot ? 2 : probe_levels);
  std::size_t joint = 1;
  for (std::size_t k = 0; k < s.particles; ++k) {
    joint *= s.system.levels * probe_per_particle;
    if (joint > kMaxTotalDim)
      throw StructuralError(s.id + ": joint dimension exceeds the cap of " + std::to_string(kMaxTotalDim) + " at " +
                            std::to_string(k + 1) + " particles");
  }

  Operator a = s.observable_a.empty() ? Operator::identity(Dim{s.system.levels}) : detail::named_observable(s.observable_a, s.system);
  std::optional<Operator> b;
  if (!s.observable_b.empty()) b = detail::named_observable(s.observable_b, s.system);
  if (s.observable_a.empty() || !b) {
    if (s.system.kind == SystemKind::grid) {
      if (s.observable_a.empty()) a = grid_position(s.system.levels, s.system.grid_spacing);
      if (!b) throw ScenarioError(s.id + ": grid systems need an explicit B observable");
    } else {
      const auto pair = observable_pair(s.system);
      if (s.observable_a.empty()) a = pair.q;
      if (!b) b = pair.p;
    }
  }
  if (s.model == ModelKind::cnot && !(a.matrix() - sigma_z().matrix()).isZero(0.0))
    throw ScenarioError(s.id + ": the cnot model measures sigma_z");

  const StateVector psi = detail::system_state(s);
  const Operator a_total = composite_observable(a, s.particles);
  const Operator b_total = composite_observable(*b, s.particles);
  const double entropy = detail::entropy_of(psi);

  std::vector<ReportRecord> out;
  if (s.model == ModelKind::none) {
    NoiseReport noise;
    noise.sigma_a = std_dev(a_total, psi);
    noise.sigma_b = std_dev(b_total, psi);
    out.push_back(detail::record_from(s, robertson_check(a_total, b_total, psi, s.tolerance, s.id), noise, entropy));
    return out;
  }

  std::vector<MeasurementModel> devices;
  for (std::size_t k = 0; k < s.particles; ++k) {
    if (s.model == ModelKind::cnot) {
      devices.push_back(cnot_model());
    } else {
      const auto probe = truncated_oscillator(probe_levels, s.system.hbar);
      devices.push_back(von_neumann_model(a, probe, oscillator_ground_probe(probe_levels, s.system.hbar), s.g));
    }
  }
  const MeasurementModel model = composite_model(devices);
  const RelationSet set = evaluate_relations(model, b_total, psi, s.tolerance, s.id);
  for (Relation r : s.relations) out.push_back(detail::record_from(s, set.get(r), set.noise, entropy));
  return out;
}

}  // namespace gur::cli
