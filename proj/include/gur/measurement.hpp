#pragma once

// Indirect measurement models (system ⊗ probe, interaction, pointer) and the
// rms noise / disturbance functionals evaluated on ψ ⊗ ζ.
//
// The joint register is ordered (system slots…, probe slots…). Interactions are
// stored as an ordered product of local unitaries so composite models over
// several particles never materialize a dense joint matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gur/model_factory.hpp"
#include "gur/operator_algebra.hpp"

namespace gur {

/// A unitary acting on a subset of joint-register slots.
struct InteractionFactor {
  std::vector<std::size_t> slots;
  Unitary unitary;
};

class MeasurementModel {
 public:
  /// `interaction` is applied factor by factor, front first: U = F_k ⋯ F_1.
  MeasurementModel(Dim system_dim, Dim probe_dim, StateVector probe_state, std::vector<InteractionFactor> interaction,
                   Operator pointer, Operator measured, std::string label = {})
      : system_dim_(std::move(system_dim)),
        probe_dim_(std::move(probe_dim)),
        joint_dim_(system_dim_.concat(probe_dim_)),
        probe_state_(std::move(probe_state)),
        interaction_(std::move(interaction)),
        pointer_(std::move(pointer)),
        measured_(std::move(measured)),
        label_(std::move(label)) {
    validate();
  }

  /// Single dense interaction unitary on the whole joint register.
  MeasurementModel(Dim system_dim, Dim probe_dim, StateVector probe_state, const Unitary& interaction,
                   Operator pointer, Operator measured, std::string label = {})
      : MeasurementModel(system_dim, probe_dim, std::move(probe_state),
                         {InteractionFactor{all_slots(system_dim.concat(probe_dim)), interaction}},
                         std::move(pointer), std::move(measured), std::move(label)) {}

  const Dim& system_dim() const { return system_dim_; }
  const Dim& probe_dim() const { return probe_dim_; }
  const Dim& joint_dim() const { return joint_dim_; }
  const StateVector& probe_state() const { return probe_state_; }
  const std::vector<InteractionFactor>& interaction() const { return interaction_; }
  const Operator& pointer() const { return pointer_; }
  const Operator& measured() const { return measured_; }
  const std::string& label() const { return label_; }
  std::size_t probe_slot_offset() const { return system_dim_.rank(); }

  /// U v.
  Vector evolve(Vector v) const {
    for (const auto& f : interaction_) v = apply_local(f.unitary.matrix(), f.slots, joint_dim_, v);
    return v;
  }

  /// U† v.
  Vector evolve_adjoint(Vector v) const {
    for (auto it = interaction_.rbegin(); it != interaction_.rend(); ++it)
      v = apply_local(it->unitary.matrix().adjoint(), it->slots, joint_dim_, v);
    return v;
  }

  /// Dense joint interaction; only sensible for small registers.
  Unitary interaction_matrix() const {
    const auto n = static_cast<Eigen::Index>(joint_dim_.total());
    Matrix u(n, n);
    for (Eigen::Index c = 0; c < n; ++c) u.col(c) = evolve(Vector::Unit(n, c));
    return Unitary(joint_dim_, std::move(u));
  }

  /// ψ ⊗ ζ.
  Vector joint_state(const StateVector& psi) const {
    if (!(psi.dim() == system_dim_))
      throw StructuralError("MeasurementModel '" + label_ + "': state Dim " + psi.dim().to_string() +
                            " vs system Dim " + system_dim_.to_string());
    const StateVector parts[] = {psi, probe_state_};
    return product_state(parts).amplitudes();
  }

  /// Applies a system operator (as op ⊗ I) to a joint vector.
  Vector apply_system(const Operator& op, const Vector& v) const {
    if (!(op.dim() == system_dim_)) throw StructuralError("apply_system: operator is not on the system register");
    std::vector<std::size_t> slots(system_dim_.rank());
    std::iota(slots.begin(), slots.end(), 0);
    return apply_local(op.matrix(), slots, joint_dim_, v);
  }

  /// Applies a probe operator (as I ⊗ op) to a joint vector.
  Vector apply_probe(const Operator& op, const Vector& v) const {
    if (!(op.dim() == probe_dim_)) throw StructuralError("apply_probe: operator is not on the probe register");
    std::vector<std::size_t> slots(probe_dim_.rank());
    std::iota(slots.begin(), slots.end(), probe_slot_offset());
    return apply_local(op.matrix(), slots, joint_dim_, v);
  }

 private:
  static std::vector<std::size_t> all_slots(const Dim& d) {
    std::vector<std::size_t> s(d.rank());
    std::iota(s.begin(), s.end(), 0);
    return s;
  }

  void validate() const {
    if (!(probe_state_.dim() == probe_dim_)) throw StructuralError("MeasurementModel: probe state Dim mismatch");
    if (!(pointer_.dim() == probe_dim_)) throw StructuralError("MeasurementModel: pointer must act on the probe");
    if (!(measured_.dim() == system_dim_)) throw StructuralError("MeasurementModel: measured observable must act on the system");
    if (!pointer_.is_hermitian()) throw ContractError("MeasurementModel: pointer is not Hermitian");
    if (!measured_.is_hermitian()) throw ContractError("MeasurementModel: measured observable is not Hermitian");
    for (const auto& f : interaction_) {
      if (f.slots.empty()) throw StructuralError("MeasurementModel: interaction factor without slots");
      if (!(joint_dim_.select(f.slots) == f.unitary.dim()))
        throw StructuralError("MeasurementModel: interaction factor does not match its slots");
      auto sorted = f.slots;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw StructuralError("MeasurementModel: interaction factor repeats a slot");
    }
  }

  Dim system_dim_;
  Dim probe_dim_;
  Dim joint_dim_;
  StateVector probe_state_;
  std::vector<InteractionFactor> interaction_;
  Operator pointer_;
  Operator measured_;
  std::string label_;
};

/// Noise and disturbance summary for one (model, B, ψ).
struct NoiseReport {
  double epsilon = 0.0;
  double mean_noise = 0.0;
  double eta = 0.0;
  double mean_disturbance = 0.0;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
};

/// Interaction exp(−i (g/ħ) A ⊗ P_probe), pointer Q_probe / g.
inline MeasurementModel von_neumann_model(const Operator& a_sys, const ObservablePair& probe,
                                          const StateVector& probe_state, double g, std::string label = "von_neumann") {
  if (g == 0.0 || !std::isfinite(g)) throw StructuralError("von_neumann_model: coupling g must be non-zero");
  if (!a_sys.is_hermitian()) throw ContractError("von_neumann_model: measured observable is not Hermitian");
  Unitary u = unitary_from_product_generator(a_sys, probe.p, g / probe.hbar);
  return MeasurementModel(a_sys.dim(), probe.q.dim(), probe_state, u, (1.0 / g) * probe.q, a_sys, std::move(label));
}

/// Qubit system controls a NOT on a qubit probe in |0⟩; pointer σz, measured σz.
inline MeasurementModel cnot_model(std::string label = "cnot") {
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = 1;
  cnot(1, 1) = 1;
  cnot(2, 3) = 1;
  cnot(3, 2) = 1;
  return MeasurementModel(Dim{2}, Dim{2}, StateVector::basis(Dim{2}, 0), Unitary(Dim{2, 2}, cnot), sigma_z(),
                          sigma_z(), std::move(label));
}

namespace detail {

// (U† (I⊗M) U − A⊗I)(ψ⊗ζ)
inline Vector noise_vector(const MeasurementModel& m, const Operator& pointer, const Operator& measured,
                           const Vector& joint) {
  const Vector out = m.evolve_adjoint(m.apply_probe(pointer, m.evolve(joint)));
  return out - m.apply_system(measured, joint);
}

// (U† (B⊗I) U − B⊗I)(ψ⊗ζ)
inline Vector disturbance_vector(const MeasurementModel& m, const Operator& b, const Vector& joint) {
  const Vector out = m.evolve_adjoint(m.apply_system(b, m.evolve(joint)));
  return out - m.apply_system(b, joint);
}

inline void require_system_observable(const MeasurementModel& m, const Operator& b, const char* who) {
  if (!(b.dim() == m.system_dim()))
    throw StructuralError(std::string(who) + ": observable Dim " + b.dim().to_string() + " vs system Dim " +
                          m.system_dim().to_string());
  if (!b.is_hermitian()) throw ContractError(std::string(who) + ": observable is not Hermitian");
}

}  // namespace detail

/// ε(A) = ‖(U†(I⊗M)U − A⊗I) ψ⊗ζ‖.
inline double rms_noise(const MeasurementModel& m, const StateVector& psi) {
  return detail::noise_vector(m, m.pointer(), m.measured(), m.joint_state(psi)).norm();
}

/// First moment ⟨U†(I⊗M)U − A⊗I⟩; may be negative.
inline double mean_noise(const MeasurementModel& m, const StateVector& psi) {
  const Vector joint = m.joint_state(psi);
  return joint.dot(detail::noise_vector(m, m.pointer(), m.measured(), joint)).real();
}

/// η(B) = ‖(U†(B⊗I)U − B⊗I) ψ⊗ζ‖.
inline double rms_disturbance(const MeasurementModel& m, const Operator& b, const StateVector& psi) {
  detail::require_system_observable(m, b, "rms_disturbance");
  return detail::disturbance_vector(m, b, m.joint_state(psi)).norm();
}

inline double mean_disturbance(const MeasurementModel& m, const Operator& b, const StateVector& psi) {
  detail::require_system_observable(m, b, "mean_disturbance");
  const Vector joint = m.joint_state(psi);
  return joint.dot(detail::disturbance_vector(m, b, joint)).real();
}

inline NoiseReport noise_report(const MeasurementModel& m, const Operator& b, const StateVector& psi) {
  detail::require_system_observable(m, b, "noise_report");
  const Vector joint = m.joint_state(psi);
  const Vector n = detail::noise_vector(m, m.pointer(), m.measured(), joint);
  const Vector d = detail::disturbance_vector(m, b, joint);
  NoiseReport r;
  r.epsilon = n.norm();
  r.mean_noise = joint.dot(n).real();
  r.eta = d.norm();
  r.mean_disturbance = joint.dot(d).real();
  r.sigma_a = std_dev(m.measured(), psi);
  r.sigma_b = std_dev(b, psi);
  return r;
}

/// Σ_k embed(pointer_k, k, probe_dims).
inline Operator composite_probe_observable(std::span<const Operator> pointers, const Dim& probe_dims) {
  if (pointers.size() != probe_dims.rank())
    throw StructuralError("composite_probe_observable: " + std::to_string(pointers.size()) + " pointers for " +
                          std::to_string(probe_dims.rank()) + " probe slots");
  Operator sum = embed(pointers[0], 0, probe_dims);
  for (std::size_t k = 1; k < pointers.size(); ++k) sum = sum + embed(pointers[k], k, probe_dims);
  return sum;
}

/// Two devices on two particles: system (s1 ⊗ s2), probe (p1 ⊗ p2), U = U2·U1,
/// pointer M1⊗I + I⊗M2, measured A1⊗I + I⊗A2.
inline MeasurementModel composite_model(const MeasurementModel& m1, const MeasurementModel& m2) {
  const Dim system = m1.system_dim().concat(m2.system_dim());
  const Dim probe = m1.probe_dim().concat(m2.probe_dim());
  const std::size_t s1 = m1.system_dim().rank();
  const std::size_t s2 = m2.system_dim().rank();
  const std::size_t p1 = m1.probe_dim().rank();

  // Old joint slot -> new joint slot for each submodel.
  auto remap1 = [&](std::size_t slot) { return slot < s1 ? slot : slot + s2; };
  auto remap2 = [&](std::size_t slot) { return slot < s2 ? slot + s1 : slot + s1 + p1; };

  std::vector<InteractionFactor> factors;
  std::vector<std::size_t> used1;
  for (const auto& f : m1.interaction()) {
    InteractionFactor g{{}, f.unitary};
    for (std::size_t s : f.slots) g.slots.push_back(remap1(s));
    used1.insert(used1.end(), g.slots.begin(), g.slots.end());
    factors.push_back(std::move(g));
  }
  for (const auto& f : m2.interaction()) {
    InteractionFactor g{{}, f.unitary};
    for (std::size_t s : f.slots) {
      g.slots.push_back(remap2(s));
      if (std::find(used1.begin(), used1.end(), g.slots.back()) != used1.end())
        throw StructuralError("composite_model: interactions overlap on a slot");
    }
    factors.push_back(std::move(g));
  }

  const Operator pointer = tensor({m1.pointer(), Operator::identity(m2.probe_dim())}) +
                           tensor({Operator::identity(m1.probe_dim()), m2.pointer()});
  const Operator measured = tensor({m1.measured(), Operator::identity(m2.system_dim())}) +
                            tensor({Operator::identity(m1.system_dim()), m2.measured()});
  const StateVector probes[] = {m1.probe_state(), m2.probe_state()};
  return MeasurementModel(system, probe, product_state(probes), std::move(factors), pointer, measured,
                          m1.label() + "+" + m2.label());
}

/// Left fold of composite_model over n ≥ 1 devices.
inline MeasurementModel composite_model(std::span<const MeasurementModel> models) {
  if (models.empty()) throw StructuralError("composite_model: empty model list");
  MeasurementModel out = models.front();
  for (std::size_t k = 1; k < models.size(); ++k) out = composite_model(out, models[k]);
  return out;
}

/// One block of the two-device decomposition audit (noise or disturbance).
struct DecompositionBlock {
  double lhs = 0.0;          // composite rms², computed directly
  double first = 0.0;        // device-1 rms² inside the composite
  double second = 0.0;       // device-2 rms² inside the composite
  double additive = 0.0;     // first + second
  double cross_factorized = 0.0;  // 2 · mean1 · mean2 (factorized cross term)
  double cross_true = 0.0;   // lhs − additive
  double residual = 0.0;     // cross_true − cross_factorized
  double mean_first = 0.0;
  double mean_second = 0.0;
  double variance_first = 0.0;   // rms² − mean², device 1
  double variance_second = 0.0;  // rms² − mean², device 2
};

struct DecompositionAudit {
  DecompositionBlock noise;
  DecompositionBlock disturbance;
};

/// Composite noise ε(Q(1,2))² and disturbance η(P(1,2))² against their
/// per-device parts, the factorized cross term and the per-device noise variance.
inline DecompositionAudit decomposition_audit(const MeasurementModel& m1, const MeasurementModel& m2,
                                              const Operator& b1, const Operator& b2, const StateVector& psi12) {
  const MeasurementModel joint_model = composite_model(m1, m2);
  const Vector joint = joint_model.joint_state(psi12);
  const Operator id_s1 = Operator::identity(m1.system_dim());
  const Operator id_s2 = Operator::identity(m2.system_dim());
  const Operator id_p1 = Operator::identity(m1.probe_dim());
  const Operator id_p2 = Operator::identity(m2.probe_dim());

  const Vector n1 = detail::noise_vector(joint_model, tensor({m1.pointer(), id_p2}), tensor({m1.measured(), id_s2}), joint);
  const Vector n2 = detail::noise_vector(joint_model, tensor({id_p1, m2.pointer()}), tensor({id_s1, m2.measured()}), joint);
  const Vector d1 = detail::disturbance_vector(joint_model, tensor({b1, id_s2}), joint);
  const Vector d2 = detail::disturbance_vector(joint_model, tensor({id_s1, b2}), joint);

  const double eps12 = rms_noise(joint_model, psi12);
  const double eta12 = rms_disturbance(joint_model, tensor({b1, id_s2}) + tensor({id_s1, b2}), psi12);

  auto block = [&](double lhs, const Vector& v1, const Vector& v2) {
    DecompositionBlock b;
    b.lhs = lhs;
    b.first = v1.squaredNorm();
    b.second = v2.squaredNorm();
    b.additive = b.first + b.second;
    b.mean_first = joint.dot(v1).real();
    b.mean_second = joint.dot(v2).real();
    b.cross_factorized = 2.0 * b.mean_first * b.mean_second;
    b.cross_true = b.lhs - b.additive;
    b.residual = b.cross_true - b.cross_factorized;
    b.variance_first = b.first - b.mean_first * b.mean_first;
    b.variance_second = b.second - b.mean_second * b.mean_second;
    return b;
  };
  return DecompositionAudit{block(eps12 * eps12, n1, n2), block(eta12 * eta12, d1, d2)};
}

}  // namespace gur
