#pragma once

// Concrete systems, observables and states: Pauli and spin matrices, truncated
// oscillators, composite (summed) observables, perfectly correlated states.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gur/operator_algebra.hpp"

namespace gur {

enum class SystemKind { qubit, spin_j, truncated_oscillator, grid };

inline std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::qubit: return "qubit";
    case SystemKind::spin_j: return "spin_j";
    case SystemKind::truncated_oscillator: return "truncated_oscillator";
    case SystemKind::grid: return "grid";
  }
  return "unknown";
}

struct SystemSpec {
  SystemKind kind = SystemKind::truncated_oscillator;
  std::size_t levels = 2;
  double hbar = 1.0;
  double grid_spacing = 1.0;

  void validate() const {
    if (levels < 2) throw StructuralError("SystemSpec: levels must be >= 2");
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw StructuralError("SystemSpec: hbar must be positive");
    if (kind == SystemKind::qubit && levels != 2) throw StructuralError("SystemSpec: qubit systems have 2 levels");
    if (kind == SystemKind::grid && !(grid_spacing > 0.0)) throw StructuralError("SystemSpec: grid_spacing must be positive");
  }
};

/// Position-like and momentum-like observables of one particle.
struct ObservablePair {
  Operator q;
  Operator p;
  double hbar = 1.0;
};

struct SpinOps {
  Operator jx;
  Operator jy;
  Operator jz;
};

inline Operator sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return Operator(Dim{2}, m);
}

inline Operator sigma_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return Operator(Dim{2}, m);
}

inline Operator sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return Operator(Dim{2}, m);
}

/// Angular momentum matrices in units of ħ, basis ordered m = j, j−1, …, −j.
inline SpinOps spin_ops(double j) {
  const double twice = 2.0 * j;
  if (!(twice >= 1.0) || std::abs(twice - std::round(twice)) > 1e-12)
    throw StructuralError("spin_ops: j must be a positive half-integer");
  const auto d = static_cast<Eigen::Index>(std::lround(twice)) + 1;
  Matrix jz = Matrix::Zero(d, d);
  Matrix raise = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double m = j - static_cast<double>(k);
    jz(k, k) = m;
    if (k > 0) raise(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  const Matrix lower = raise.adjoint();
  const Dim dim{static_cast<std::size_t>(d)};
  return SpinOps{Operator(dim, 0.5 * (raise + lower), "hbar"),
                 Operator(dim, Complex(0.0, -0.5) * (raise - lower), "hbar"),
                 Operator(dim, jz, "hbar")};
}

/// N-level annihilation matrix: a|n⟩ = √n |n−1⟩.
inline Matrix ladder_matrix(std::size_t levels) {
  const auto n = static_cast<Eigen::Index>(levels);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

/// q = √(ħ/2)(a + a†), p = i√(ħ/2)(a† − a) on the lowest N Fock levels.
///
/// [q, p] = iħ on every level except the top one, where it is −(N−1)iħ.
inline ObservablePair truncated_oscillator(std::size_t levels, double hbar = 1.0) {
  if (levels < 2) throw StructuralError("truncated_oscillator: need at least 2 levels");
  if (!(hbar > 0.0)) throw StructuralError("truncated_oscillator: hbar must be positive");
  const Matrix a = ladder_matrix(levels);
  const double scale = std::sqrt(hbar / 2.0);
  const Dim dim{levels};
  return ObservablePair{Operator(dim, scale * (a + a.adjoint()), "sqrt(hbar)"),
                        Operator(dim, Complex(0.0, scale) * (a.adjoint() - a), "sqrt(hbar)"), hbar};
}

/// Diagonal position operator on an evenly spaced grid centred at zero.
inline Operator grid_position(std::size_t levels, double spacing) {
  if (levels < 2) throw StructuralError("grid_position: need at least 2 points");
  if (!(spacing > 0.0)) throw StructuralError("grid_position: spacing must be positive");
  const auto n = static_cast<Eigen::Index>(levels);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = (static_cast<double>(k) - 0.5 * static_cast<double>(n - 1)) * spacing;
  return Operator(Dim{levels}, m, "length");
}

/// Default (A, B) pair for a system: (σz, σx) for qubits, ħ(jz, jx) for spins,
/// (q, p) for oscillators. Grids carry no momentum.
inline ObservablePair observable_pair(const SystemSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case SystemKind::qubit:
      return ObservablePair{sigma_z(), sigma_x(), spec.hbar};
    case SystemKind::spin_j: {
      const auto s = spin_ops(0.5 * static_cast<double>(spec.levels - 1));
      return ObservablePair{spec.hbar * s.jz, spec.hbar * s.jx, spec.hbar};
    }
    case SystemKind::truncated_oscillator:
      return truncated_oscillator(spec.levels, spec.hbar);
    case SystemKind::grid:
      throw StructuralError("observable_pair: grid systems provide position only");
  }
  throw StructuralError("observable_pair: unknown system kind");
}

/// Σ_k embed(op, k, [d]^n).
inline Operator composite_observable(const Operator& op, std::size_t n) {
  if (n == 0) throw StructuralError("composite_observable: particle count must be >= 1");
  if (n == 1) return op;
  const Dim dims = Dim::repeated(op.dim().total(), n);
  Operator sum = embed(op, 0, dims);
  for (std::size_t k = 1; k < n; ++k) sum = sum + embed(op, k, dims);
  return sum;
}

/// Σ_x √w_x |x⟩^⊗n over `levels`-dimensional particles (weights normalized here).
inline StateVector correlated_state(std::span<const double> weights, std::size_t n, std::size_t levels) {
  if (n == 0) throw StructuralError("correlated_state: particle count must be >= 1");
  if (weights.empty()) throw StructuralError("correlated_state: empty weight vector");
  if (weights.size() > levels) throw StructuralError("correlated_state: more weights than levels");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw StructuralError("correlated_state: weights must be non-negative");
    total += w;
  }
  if (total == 0.0) throw StructuralError("correlated_state: all weights are zero");
  const Dim dims = Dim::repeated(levels, n);
  std::size_t diagonal_stride = 0;
  for (std::size_t k = 0, s = 1; k < n; ++k, s *= levels) diagonal_stride += s;
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
  for (std::size_t x = 0; x < weights.size(); ++x)
    amps(static_cast<Eigen::Index>(x * diagonal_stride)) = std::sqrt(weights[x] / total);
  return StateVector(dims, std::move(amps));
}

inline StateVector correlated_state(std::span<const double> weights, std::size_t n) {
  return correlated_state(weights, n, weights.size());
}

inline StateVector correlated_state(std::initializer_list<double> weights, std::size_t n, std::size_t levels = 0) {
  const std::span<const double> w(weights.begin(), weights.size());
  return correlated_state(w, n, levels == 0 ? weights.size() : levels);
}

inline StateVector product_state(std::span<const StateVector> parts) {
  if (parts.empty()) throw StructuralError("product_state: empty part list");
  Dim dim = parts.front().dim();
  Vector amps = parts.front().amplitudes();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const Vector& b = parts[k].amplitudes();
    Vector next(amps.size() * b.size());
    for (Eigen::Index i = 0; i < amps.size(); ++i) next.segment(i * b.size(), b.size()) = amps(i) * b;
    amps = std::move(next);
    dim = dim.concat(parts[k].dim());
  }
  return StateVector(std::move(dim), std::move(amps));
}

inline StateVector product_state(std::initializer_list<StateVector> parts) {
  return product_state(std::span<const StateVector>(parts.begin(), parts.size()));
}

/// Fock ground state |0⟩ of the N-level probe oscillator.
inline StateVector oscillator_ground_probe(std::size_t levels, double hbar = 1.0) {
  if (levels < 2) throw StructuralError("oscillator_ground_probe: need at least 2 levels");
  if (!(hbar > 0.0)) throw StructuralError("oscillator_ground_probe: hbar must be positive");
  return StateVector::basis(Dim{levels}, 0);
}

/// Amplitude carried by basis states with any subsystem on its top two levels.
inline double top_level_amplitude(const StateVector& psi) {
  const Dim& dims = psi.dim();
  const auto strides = dims.strides();
  double mass = 0.0;
  for (std::size_t i = 0; i < dims.total(); ++i) {
    bool edge = false;
    for (std::size_t k = 0; k < dims.rank() && !edge; ++k) edge = (i / strides[k]) % dims[k] + 2 >= dims[k];
    if (edge) mass += std::norm(psi.amplitudes()(static_cast<Eigen::Index>(i)));
  }
  return std::sqrt(mass);
}

inline constexpr double kInteriorThreshold = 1e-6;

/// True when the truncated [q, p] = iħ identity can be trusted on psi.
inline bool is_interior_supported(const StateVector& psi, double threshold = kInteriorThreshold) {
  return top_level_amplitude(psi) < threshold;
}

}  // namespace gur
