#pragma once

// Uncertainty-relation auditing: Robertson, the naive noise-disturbance
// product, Ozawa's three-term relation and Fujikawa's four-term relation, plus
// the n-particle entanglement scaling experiment.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gur/measurement.hpp"
#include "gur/model_factory.hpp"
#include "gur/operator_algebra.hpp"

namespace gur {

enum class Relation { robertson, naive_product, ozawa, fujikawa };

inline std::string to_string(Relation r) {
  switch (r) {
    case Relation::robertson: return "robertson";
    case Relation::naive_product: return "naive_product";
    case Relation::ozawa: return "ozawa";
    case Relation::fujikawa: return "fujikawa";
  }
  return "unknown";
}

/// Whether a violation of this relation is a failure (the naive product is
/// expected to fail for some models).
inline bool must_hold(Relation r) { return r != Relation::naive_product; }

inline constexpr double kIdentityTol = 1e-9;
inline constexpr double kInequalityTol = 1e-6;
inline constexpr double kContinuumTol = 5e-2;

struct RelationReport {
  Relation relation = Relation::robertson;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool satisfied = true;
  double tolerance = 0.0;
  std::string context;
};

/// margin = lhs − rhs; a tie at −tolerance counts as satisfied.
inline RelationReport make_report(Relation relation, double lhs, double rhs, double tolerance, std::string context = {}) {
  RelationReport r{relation, lhs, rhs, lhs - rhs, true, tolerance, std::move(context)};
  r.satisfied = r.margin >= -tolerance;
  return r;
}

/// |⟨ψ|[A,B]|ψ⟩| / 2.
inline double commutator_bound(const Operator& a, const Operator& b, const StateVector& psi) {
  return std::abs(expectation(commutator(a, b), psi)) / 2.0;
}

inline RelationReport robertson_check(const Operator& a, const Operator& b, const StateVector& psi, double tol,
                                      std::string context = {}) {
  return make_report(Relation::robertson, std::abs(std_dev(a, psi) * std_dev(b, psi)), commutator_bound(a, b, psi), tol,
                     std::move(context));
}

/// Term sums shared by the model-based relations.
inline double naive_product_lhs(const NoiseReport& n) { return n.epsilon * n.eta; }
inline double ozawa_lhs(const NoiseReport& n) {
  return n.epsilon * n.eta + n.epsilon * n.sigma_b + n.sigma_a * n.eta;
}
inline double fujikawa_lhs(const NoiseReport& n) { return ozawa_lhs(n) + n.sigma_a * n.sigma_b; }

/// All four relations for one (model, B, ψ), sharing a single noise evaluation.
struct RelationSet {
  NoiseReport noise;
  RelationReport robertson;
  RelationReport naive_product;
  RelationReport ozawa;
  RelationReport fujikawa;

  const RelationReport& get(Relation r) const {
    switch (r) {
      case Relation::robertson: return robertson;
      case Relation::naive_product: return naive_product;
      case Relation::ozawa: return ozawa;
      case Relation::fujikawa: return fujikawa;
    }
    return robertson;
  }
};

inline RelationSet evaluate_relations(const MeasurementModel& model, const Operator& b, const StateVector& psi,
                                      double tol, const std::string& context = {}) {
  RelationSet s;
  s.noise = noise_report(model, b, psi);
  const double rhs = commutator_bound(model.measured(), b, psi);
  s.robertson = make_report(Relation::robertson, s.noise.sigma_a * s.noise.sigma_b, rhs, tol, context);
  s.naive_product = make_report(Relation::naive_product, naive_product_lhs(s.noise), rhs, tol, context);
  s.ozawa = make_report(Relation::ozawa, ozawa_lhs(s.noise), rhs, tol, context);
  s.fujikawa = make_report(Relation::fujikawa, fujikawa_lhs(s.noise), rhs, tol, context);
  return s;
}

/// ε(A)η(B) against |⟨[A,B]⟩|/2; expected to fail for some models.
inline RelationReport naive_product_check(const MeasurementModel& model, const Operator& b, const StateVector& psi,
                                          double tol, std::string context = {}) {
  auto r = evaluate_relations(model, b, psi, tol, context).naive_product;
  return r;
}

/// εη + εσ(B) + σ(A)η ≥ |⟨[A,B]⟩|/2.
inline RelationReport ozawa_check(const MeasurementModel& model, const Operator& b, const StateVector& psi, double tol,
                                  std::string context = {}) {
  return evaluate_relations(model, b, psi, tol, context).ozawa;
}

/// εη + εσ(B) + σ(A)η + σ(A)σ(B) ≥ |⟨[A,B]⟩|/2.
inline RelationReport fujikawa_check(const MeasurementModel& model, const Operator& b, const StateVector& psi,
                                     double tol, std::string context = {}) {
  return evaluate_relations(model, b, psi, tol, context).fujikawa;
}

/// Re⟨q1 q2⟩ − ⟨q1⟩⟨q2⟩ for observables on the same register.
inline double covariance(const Operator& q1, const Operator& q2, const StateVector& psi) {
  q1.require_same(q2, "covariance");
  require_same_dim(q1, psi, "covariance");
  const Vector a = q1.matrix() * psi.amplitudes();
  const Vector b = q2.matrix() * psi.amplitudes();
  return a.dot(b).real() - psi.amplitudes().dot(a).real() * psi.amplitudes().dot(b).real();
}

/// σ of Σ_k embed(op, k) on an n-party state.
inline double sigma_composite(const Operator& op, std::size_t n, const StateVector& psi) {
  return std_dev(composite_observable(op, n), psi);
}

struct ScalingConfig {
  SystemSpec system{SystemKind::truncated_oscillator, 4, 1.0, 1.0};
  std::vector<double> weights{1.0, 1.0};
  std::size_t n_max = 4;
  double g = 1.0;
  std::size_t probe_levels = 2;
  double tolerance = kInequalityTol;
  double commutator_tolerance = 1e-8;
};

struct ScalingRow {
  std::size_t n = 0;
  double hbar = 1.0;
  // Composite quantities, evaluated directly on the n-particle register.
  double sigma_q = 0.0;
  double sigma_p = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;
  double commutator_mag = 0.0;
  // Single-particle quantities (particle 0, inside the composite).
  double sigma_q1 = 0.0;
  double sigma_p1 = 0.0;
  double eps1 = 0.0;
  double eta1 = 0.0;
  // Factored forms n·x₁ next to the direct values.
  double sigma_q_factored = 0.0;
  double epsilon_factored = 0.0;
  double eta_factored = 0.0;
  // Per-particle relation sides.
  double per_particle_ozawa_lhs = 0.0;     // direct composite lhs / n²
  double per_particle_fujikawa_lhs = 0.0;  // direct composite lhs / n²
  double factored_ozawa_lhs = 0.0;         // from the single-particle columns
  double factored_fujikawa_lhs = 0.0;
  double per_particle_bound = 0.0;           // ħ / (2n)
  double per_particle_fujikawa_bound = 0.0;  // ħ / n
  double entanglement_entropy = 0.0;
  bool interior_supported = false;
  bool commutator_ok = false;
  bool ozawa_satisfied = false;
  bool fujikawa_satisfied = false;

  bool passed() const { return interior_supported && commutator_ok && ozawa_satisfied && fujikawa_satisfied; }
};

/// Joint system+probe dimension of the n-particle scaling register.
inline std::size_t scaling_joint_dim(const ScalingConfig& cfg, std::size_t n) {
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) {
    total *= cfg.system.levels * cfg.probe_levels;
    if (total > kMaxTotalDim) return total;
  }
  return total;
}

/// Throws StructuralError naming the first n whose register exceeds the cap.
inline void check_scaling_cap(const ScalingConfig& cfg) {
  for (std::size_t n = 1; n <= cfg.n_max; ++n) {
    if (scaling_joint_dim(cfg, n) > kMaxTotalDim)
      throw StructuralError("scaling_experiment: n=" + std::to_string(n) + " needs a joint dimension above " +
                            std::to_string(kMaxTotalDim) + " (levels " + std::to_string(cfg.system.levels) +
                            ", probe_levels " + std::to_string(cfg.probe_levels) +
                            "); lower levels, probe_levels or n_max");
  }
}

inline ScalingRow scaling_row(const ScalingConfig& cfg, std::size_t n) {
  const double hbar = cfg.system.hbar;
  const ObservablePair particle = truncated_oscillator(cfg.system.levels, hbar);
  const ObservablePair probe = truncated_oscillator(cfg.probe_levels, hbar);
  const StateVector zeta = oscillator_ground_probe(cfg.probe_levels, hbar);
  const StateVector psi = correlated_state(cfg.weights, n, cfg.system.levels);

  std::vector<MeasurementModel> devices;
  for (std::size_t k = 0; k < n; ++k)
    devices.push_back(von_neumann_model(particle.q, probe, zeta, cfg.g, "vn" + std::to_string(k)));
  const MeasurementModel model = composite_model(devices);

  const Dim& sys = model.system_dim();
  const Operator q_total = composite_observable(particle.q, n);
  const Operator p_total = composite_observable(particle.p, n);
  const Operator q1 = embed(particle.q, 0, sys);
  const Operator p1 = embed(particle.p, 0, sys);
  const Operator pointer1 = embed((1.0 / cfg.g) * probe.q, 0, model.probe_dim());

  ScalingRow row;
  row.n = n;
  row.hbar = hbar;
  row.sigma_q = std_dev(q_total, psi);
  row.sigma_p = std_dev(p_total, psi);
  row.epsilon = rms_noise(model, psi);
  row.eta = rms_disturbance(model, p_total, psi);
  row.commutator_mag = std::abs(expectation(commutator(q_total, p_total), psi));

  const Vector joint = model.joint_state(psi);
  row.sigma_q1 = std_dev(q1, psi);
  row.sigma_p1 = std_dev(p1, psi);
  row.eps1 = detail::noise_vector(model, pointer1, q1, joint).norm();
  row.eta1 = detail::disturbance_vector(model, p1, joint).norm();

  const double nn = static_cast<double>(n);
  row.sigma_q_factored = nn * row.sigma_q1;
  row.epsilon_factored = nn * row.eps1;
  row.eta_factored = nn * row.eta1;

  const NoiseReport composite{row.epsilon, 0.0, row.eta, 0.0, row.sigma_q, row.sigma_p};
  row.per_particle_ozawa_lhs = ozawa_lhs(composite) / (nn * nn);
  row.per_particle_fujikawa_lhs = fujikawa_lhs(composite) / (nn * nn);
  const NoiseReport single{row.eps1, 0.0, row.eta1, 0.0, row.sigma_q1, row.sigma_p1};
  row.factored_ozawa_lhs = ozawa_lhs(single);
  row.factored_fujikawa_lhs = fujikawa_lhs(single);

  row.per_particle_bound = hbar / (2.0 * nn);
  row.per_particle_fujikawa_bound = hbar / nn;
  row.entanglement_entropy = vn_entropy(partial_trace(psi, {0}));

  row.interior_supported = is_interior_supported(psi);
  row.commutator_ok = std::abs(row.commutator_mag - nn * hbar) <= cfg.commutator_tolerance;
  row.ozawa_satisfied = row.per_particle_ozawa_lhs - row.per_particle_bound >= -cfg.tolerance;
  row.fujikawa_satisfied = row.per_particle_fujikawa_lhs - row.per_particle_fujikawa_bound >= -cfg.tolerance;
  return row;
}

/// One row per n = 1..n_max, ascending. Every particle gets an identical
/// von Neumann device with its own ground-state probe.
inline std::vector<ScalingRow> scaling_experiment(const ScalingConfig& cfg) {
  cfg.system.validate();
  if (cfg.system.kind != SystemKind::truncated_oscillator)
    throw StructuralError("scaling_experiment: particles must be truncated oscillators");
  if (cfg.n_max < 1) throw StructuralError("scaling_experiment: n_max must be >= 1");
  if (cfg.probe_levels < 2) throw StructuralError("scaling_experiment: probe_levels must be >= 2");
  check_scaling_cap(cfg);
  std::vector<ScalingRow> rows;
  rows.reserve(cfg.n_max);
  for (std::size_t n = 1; n <= cfg.n_max; ++n) rows.push_back(scaling_row(cfg, n));
  return rows;
}

}  // namespace gur
