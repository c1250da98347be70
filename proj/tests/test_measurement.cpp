#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gur/measurement.hpp"
#include "gur/model_factory.hpp"
#include "gur/random.hpp"

using namespace gur;

namespace {

const Complex I(0.0, 1.0);

StateVector plus_i() {
  Vector v(2);
  v << 1.0, I;
  return StateVector(Dim{2}, v);
}

MeasurementModel oscillator_model(std::size_t levels, std::size_t probe_levels, double g, double hbar = 1.0) {
  const auto sys = truncated_oscillator(levels, hbar);
  const auto probe = truncated_oscillator(probe_levels, hbar);
  return von_neumann_model(sys.q, probe, oscillator_ground_probe(probe_levels, hbar), g);
}

Matrix kron_m(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector kron_v(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// Dense reference: every operator materialized on the joint space.
struct DenseOracle {
  Matrix u;
  Matrix pointer;
  Matrix measured;
  Vector joint;

  double noise() const {
    const Vector v = (u.adjoint() * pointer * u - measured) * joint;
    return v.norm();
  }
  double disturbance(const Matrix& b) const { return ((u.adjoint() * b * u - b) * joint).norm(); }
};

DenseOracle dense_von_neumann(const Operator& a, const ObservablePair& probe, double g, const StateVector& psi) {
  DenseOracle o;
  const Matrix generator = (g / probe.hbar) * kron_m(a.matrix(), probe.p.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> es(generator);
  const Vector phase = (es.eigenvalues().cast<Complex>() * -I).array().exp().matrix();
  o.u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  const auto ds = a.matrix().rows();
  const auto dp = probe.q.matrix().rows();
  o.pointer = kron_m(Matrix::Identity(ds, ds), probe.q.matrix() / g);
  o.measured = kron_m(a.matrix(), Matrix::Identity(dp, dp));
  Vector zeta = Vector::Zero(dp);
  zeta(0) = 1.0;
  o.joint = kron_v(psi.amplitudes(), zeta);
  return o;
}

}  // namespace

TEST(MeasurementModel, Validation) {
  const StateVector zeta = StateVector::basis(Dim{2}, 0);
  const Unitary u(Dim{2, 2}, Matrix::Identity(4, 4));
  EXPECT_THROW(MeasurementModel(Dim{2}, Dim{2}, StateVector::basis(Dim{3}, 0), u, sigma_z(), sigma_z()),
               StructuralError);
  EXPECT_THROW(MeasurementModel(Dim{2}, Dim{2}, zeta, u, Operator::identity(Dim{3}), sigma_z()), StructuralError);
  EXPECT_THROW(MeasurementModel(Dim{2}, Dim{2}, zeta, u, Operator(Dim{2}, Matrix::Ones(2, 2) * I), sigma_z()),
               ContractError);
  EXPECT_THROW(MeasurementModel(Dim{2}, Dim{3}, StateVector::basis(Dim{3}, 0), u, Operator::identity(Dim{3}),
                                sigma_z()),
               StructuralError);
}

TEST(MeasurementModel, StateDimMismatch) {
  const MeasurementModel m = cnot_model();
  EXPECT_THROW(rms_noise(m, StateVector::basis(Dim{3}, 0)), StructuralError);
  EXPECT_THROW(rms_disturbance(m, Operator::identity(Dim{3}), StateVector::basis(Dim{2}, 0)), StructuralError);
}

TEST(VonNeumannModel, ZeroCouplingThrows) {
  const auto probe = truncated_oscillator(4, 1.0);
  EXPECT_THROW(von_neumann_model(sigma_z(), probe, oscillator_ground_probe(4), 0.0), StructuralError);
}

TEST(VonNeumannModel, InteractionIsUnitary) {
  const MeasurementModel m = oscillator_model(4, 6, 0.8);
  const Matrix u = m.interaction_matrix().matrix();
  EXPECT_LE((u.adjoint() * u - Matrix::Identity(24, 24)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CnotModel, NoiseVanishesOnRandomStates) {
  std::mt19937_64 rng(3);
  const MeasurementModel m = cnot_model();
  for (int trial = 0; trial < 200; ++trial) {
    const StateVector psi = random_state(Dim{2}, rng);
    EXPECT_LE(rms_noise(m, psi), 1e-12);
    EXPECT_LE(std::abs(mean_noise(m, psi)), 1e-12);
  }
}

TEST(CnotModel, SigmaXDisturbance) {
  // U†(σx⊗I)U = σx⊗σx, so the disturbance vector is σxψ ⊗ (|1⟩ − |0⟩) with norm √2.
  std::mt19937_64 rng(4);
  const MeasurementModel m = cnot_model();
  EXPECT_NEAR(rms_disturbance(m, sigma_x(), plus_i()), std::sqrt(2.0), 1e-12);
  for (int trial = 0; trial < 50; ++trial)
    EXPECT_NEAR(rms_disturbance(m, sigma_x(), random_state(Dim{2}, rng)), std::sqrt(2.0), 1e-12);
  EXPECT_LE(rms_disturbance(m, sigma_z(), plus_i()), 1e-15);
}

TEST(VonNeumannModel, GroundStateNoiseAndDisturbance) {
  const StateVector ground = StateVector::basis(Dim{16}, 0);
  const auto sys = truncated_oscillator(16, 1.0);
  const MeasurementModel m1 = oscillator_model(16, 16, 1.0);
  const MeasurementModel m2 = oscillator_model(16, 16, 2.0);
  const double eps1 = rms_noise(m1, ground);
  EXPECT_NEAR(eps1, std::sqrt(0.5), 2e-2);
  EXPECT_NEAR(rms_noise(m2, ground), 0.5 * eps1, 5e-2);
  EXPECT_NEAR(rms_disturbance(m1, sys.p, ground), std::sqrt(0.5), 2e-2);
  EXPECT_NEAR(rms_disturbance(m2, sys.p, ground), 2.0 * std::sqrt(0.5), 5e-2);
  EXPECT_NEAR(mean_noise(m1, ground), 0.0, 1e-9);
}

TEST(VonNeumannModel, MatchesDenseOracle) {
  std::mt19937_64 rng(8);
  for (double hbar : {1.0, 2.0}) {
    const auto sys = truncated_oscillator(5, hbar);
    const auto probe = truncated_oscillator(7, hbar);
    for (double g : {0.3, 1.0, 2.5}) {
      const MeasurementModel m = von_neumann_model(sys.q, probe, oscillator_ground_probe(7, hbar), g);
      const StateVector psi = random_state(Dim{5}, rng);
      const DenseOracle o = dense_von_neumann(sys.q, probe, g, psi);
      EXPECT_NEAR(rms_noise(m, psi), o.noise(), 1e-10);
      EXPECT_NEAR(rms_disturbance(m, sys.p, psi), o.disturbance(kron_m(sys.p.matrix(), Matrix::Identity(7, 7))), 1e-10);
    }
  }
}

TEST(Disturbance, ZeroForCommutingObservable) {
  std::mt19937_64 rng(9);
  const auto sys = truncated_oscillator(6, 1.0);
  const MeasurementModel m = oscillator_model(6, 8, 1.3);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi = random_state(Dim{6}, rng);
    EXPECT_LE(rms_disturbance(m, sys.q, psi), 1e-10);
    EXPECT_LE(rms_disturbance(m, sys.q * sys.q, psi), 1e-10);
  }
}

TEST(Noise, MeanBoundedByRms) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Operator a = random_hermitian(3, rng);
    const auto probe = truncated_oscillator(6, 1.0);
    const MeasurementModel m = von_neumann_model(a, probe, random_state(Dim{6}, rng), 0.5 + 0.05 * trial);
    const StateVector psi = random_state(Dim{3}, rng);
    const Operator b = random_hermitian(3, rng);
    const NoiseReport r = noise_report(m, b, psi);
    EXPECT_GE(r.epsilon, 0.0);
    EXPECT_GE(r.eta, 0.0);
    EXPECT_LE(r.mean_noise * r.mean_noise, r.epsilon * r.epsilon + 1e-10);
    EXPECT_LE(r.mean_disturbance * r.mean_disturbance, r.eta * r.eta + 1e-10);
  }
}

TEST(CompositeProbeObservable, Cases) {
  const Operator single[] = {sigma_z()};
  EXPECT_LE((composite_probe_observable(single, Dim{2}).matrix() - sigma_z().matrix()).norm(), 0.0);
  const Operator pair[] = {sigma_z(), sigma_z()};
  Eigen::SelfAdjointEigenSolver<Matrix> es(composite_probe_observable(pair, Dim{2, 2}).matrix());
  EXPECT_LE((es.eigenvalues() - Eigen::Vector4d(-2, 0, 0, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(composite_probe_observable(pair, Dim{2}), StructuralError);
}

TEST(CompositeModel, MatchesDenseProduct) {
  std::mt19937_64 rng(12);
  const auto sys = truncated_oscillator(3, 1.0);
  const auto probe = truncated_oscillator(3, 1.0);
  const StateVector zeta = oscillator_ground_probe(3);
  const MeasurementModel m1 = von_neumann_model(sys.q, probe, zeta, 0.7);
  const MeasurementModel m2 = von_neumann_model(sys.q, probe, zeta, 1.4);
  const MeasurementModel m = composite_model(m1, m2);
  EXPECT_EQ(m.system_dim(), (Dim{3, 3}));
  EXPECT_EQ(m.probe_dim(), (Dim{3, 3}));

  // Joint order s1 s2 p1 p2; device k couples s_k with p_k.
  const Dim joint{3, 3, 3, 3};
  auto generator = [&](std::size_t s, std::size_t p, double g) {
    return g * (embed(sys.q, s, joint) * embed(probe.p, p, joint));
  };
  const Matrix u = unitary_from_generator(generator(0, 2, 0.7) + generator(1, 3, 1.4), 1.0).matrix();
  EXPECT_LE((m.interaction_matrix().matrix() - u).cwiseAbs().maxCoeff(), 1e-10);

  const StateVector psi = random_state(Dim{3, 3}, rng);
  const Matrix pointer = ((1.0 / 0.7) * embed(probe.q, 2, joint) + (1.0 / 1.4) * embed(probe.q, 3, joint)).matrix();
  const Matrix measured = (embed(sys.q, 0, joint) + embed(sys.q, 1, joint)).matrix();
  const Vector full = m.joint_state(psi);
  EXPECT_NEAR(rms_noise(m, psi), ((u.adjoint() * pointer * u - measured) * full).norm(), 1e-10);
}

TEST(CompositeModel, FoldOverList) {
  const std::vector<MeasurementModel> devices{cnot_model(), cnot_model(), cnot_model()};
  const MeasurementModel m = composite_model(devices);
  EXPECT_EQ(m.system_dim(), (Dim{2, 2, 2}));
  EXPECT_EQ(m.probe_dim(), (Dim{2, 2, 2}));
  EXPECT_THROW(composite_model(std::span<const MeasurementModel>{}), StructuralError);
  std::mt19937_64 rng(13);
  EXPECT_LE(rms_noise(m, random_state(Dim{2, 2, 2}, rng)), 1e-12);
}

TEST(DecompositionAudit, ProductStateResidualVanishes) {
  std::mt19937_64 rng(14);
  const auto sys = truncated_oscillator(4, 1.0);
  const MeasurementModel m1 = oscillator_model(4, 6, 1.0);
  const MeasurementModel m2 = oscillator_model(4, 6, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector psi = product_state({random_state(Dim{4}, rng), random_state(Dim{4}, rng)});
    const DecompositionAudit a = decomposition_audit(m1, m2, sys.p, sys.p, psi);
    EXPECT_LE(std::abs(a.noise.residual), 1e-9);
    EXPECT_LE(std::abs(a.disturbance.residual), 1e-9);
    EXPECT_NEAR(a.noise.lhs, a.noise.additive + a.noise.cross_factorized, 1e-9);
    EXPECT_GE(a.noise.variance_first, -1e-12);
    EXPECT_GE(a.noise.variance_second, -1e-12);
  }
}

TEST(DecompositionAudit, NoiselessFirstDevice) {
  std::mt19937_64 rng(15);
  const MeasurementModel m2 = von_neumann_model(sigma_z(), truncated_oscillator(6, 1.0), oscillator_ground_probe(6), 0.9);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector psi = random_state(Dim{2, 2}, rng);
    const DecompositionAudit a = decomposition_audit(cnot_model(), m2, sigma_z(), sigma_x(), psi);
    EXPECT_NEAR(a.noise.first, 0.0, 1e-12);
    EXPECT_NEAR(a.noise.lhs, a.noise.second, 1e-9);
    EXPECT_NEAR(a.disturbance.first, 0.0, 1e-12);
    EXPECT_NEAR(a.disturbance.lhs, a.disturbance.second, 1e-9);
  }
}

TEST(DecompositionAudit, EntangledResidualIsReported) {
  const MeasurementModel m = von_neumann_model(sigma_z(), truncated_oscillator(4, 1.0), oscillator_ground_probe(4), 1.0);
  const StateVector bell = correlated_state({1.0, 1.0}, 2);
  const DecompositionAudit a = decomposition_audit(m, m, sigma_x(), sigma_x(), bell);
  EXPECT_TRUE(std::isfinite(a.noise.residual));
  EXPECT_NEAR(a.noise.cross_true, a.noise.lhs - a.noise.additive, 1e-15);
  EXPECT_NEAR(a.noise.residual, a.noise.cross_true - a.noise.cross_factorized, 1e-15);
}
