#pragma once

// Dense complex linear algebra on finite tensor-product Hilbert spaces.
//
// Subsystem ordering follows the Kronecker convention: for dims {d0, d1, ...}
// the flat index is i0 * (d1 * d2 * ...) + i1 * (d2 * ...) + ..., so slot 0
// is the most significant digit and tensor({a, b}) == kron(a, b).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gur/errors.hpp"

namespace gur {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxTotalDim = 4096;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kEntropyCutoff = 1e-14;

/// Ordered list of subsystem dimensions.
class Dim {
 public:
  Dim() : Dim(trivial()) {}

  explicit Dim(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw StructuralError("Dim: empty subsystem list");
    total_ = 1;
    for (std::size_t d : dims_) {
      if (d < 2) throw StructuralError("Dim: subsystem dimension must be >= 2, got " + std::to_string(d));
      if (total_ > kMaxTotalDim / d) throw cap_error(dims_);
      total_ *= d;
    }
  }

  Dim(std::initializer_list<std::size_t> dims) : Dim(std::vector<std::size_t>(dims)) {}

  /// A single 1-dimensional placeholder subsystem.
  static Dim trivial() {
    Dim d{Placeholder{}};
    return d;
  }

  /// n copies of a d-dimensional subsystem.
  static Dim repeated(std::size_t d, std::size_t n) {
    if (n == 0) throw StructuralError("Dim::repeated: zero copies");
    return Dim(std::vector<std::size_t>(n, d));
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t total() const { return total_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t i) const { return dims_.at(i); }
  bool is_trivial() const { return total_ == 1; }

  Dim concat(const Dim& other) const {
    if (is_trivial()) return other;
    if (other.is_trivial()) return *this;
    std::vector<std::size_t> out = dims_;
    out.insert(out.end(), other.dims_.begin(), other.dims_.end());
    return Dim(std::move(out));
  }

  /// Dimension of the sub-register spanned by `slots`, in the given order.
  Dim select(std::span<const std::size_t> slots) const {
    std::vector<std::size_t> out;
    out.reserve(slots.size());
    for (std::size_t s : slots) {
      if (s >= rank()) throw StructuralError("Dim::select: slot " + std::to_string(s) + " out of range");
      out.push_back(dims_[s]);
    }
    return Dim(std::move(out));
  }

  /// Row-major strides, slot 0 most significant.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(rank(), 1);
    for (std::size_t k = rank(); k-- > 1;) s[k - 1] = s[k] * dims_[k];
    return s;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << ']';
    return os.str();
  }

  friend bool operator==(const Dim& a, const Dim& b) { return a.dims_ == b.dims_; }

 private:
  struct Placeholder {};
  explicit Dim(Placeholder) : dims_{1}, total_(1) {}

  static StructuralError cap_error(const std::vector<std::size_t>& dims) {
    std::ostringstream os;
    os << "Dim: total dimension of [";
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << "] exceeds the cap of " << kMaxTotalDim;
    return StructuralError(os.str());
  }

  std::vector<std::size_t> dims_;
  std::size_t total_ = 1;
};

namespace detail {

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool hermitian_within(const Matrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline void require_size(const Dim& dim, Eigen::Index rows, Eigen::Index cols, const char* who) {
  auto n = static_cast<Eigen::Index>(dim.total());
  if (rows != n || cols != n) {
    std::ostringstream os;
    os << who << ": matrix is " << rows << "x" << cols << " but Dim " << dim.to_string() << " needs " << n << "x" << n;
    throw StructuralError(os.str());
  }
}

}  // namespace detail

/// Square operator on a tensor-product space, with a cached Hermiticity flag.
class Operator {
 public:
  Operator(Dim dim, Matrix entries, std::string units = {})
      : dim_(std::move(dim)), entries_(std::move(entries)), units_(std::move(units)) {
    detail::require_size(dim_, entries_.rows(), entries_.cols(), "Operator");
    hermitian_ = detail::hermitian_within(entries_, kHermitianTol);
  }

  static Operator identity(const Dim& dim) {
    auto n = static_cast<Eigen::Index>(dim.total());
    return Operator(dim, Matrix::Identity(n, n));
  }
  static Operator zero(const Dim& dim) {
    auto n = static_cast<Eigen::Index>(dim.total());
    return Operator(dim, Matrix::Zero(n, n));
  }

  const Dim& dim() const { return dim_; }
  const Matrix& matrix() const { return entries_; }
  bool is_hermitian() const { return hermitian_; }
  const std::string& units() const { return units_; }

  Operator with_units(std::string units) const { return Operator(dim_, entries_, std::move(units)); }
  Operator adjoint() const { return Operator(dim_, entries_.adjoint(), units_); }

  friend Operator operator+(const Operator& a, const Operator& b) {
    a.require_same(b, "operator+");
    return Operator(a.dim_, a.entries_ + b.entries_, a.units_ == b.units_ ? a.units_ : std::string{});
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    a.require_same(b, "operator-");
    return Operator(a.dim_, a.entries_ - b.entries_, a.units_ == b.units_ ? a.units_ : std::string{});
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.require_same(b, "operator*");
    return Operator(a.dim_, a.entries_ * b.entries_);
  }
  friend Operator operator*(Complex s, const Operator& a) { return Operator(a.dim_, s * a.entries_, a.units_); }
  friend Operator operator*(double s, const Operator& a) { return Operator(a.dim_, s * a.entries_, a.units_); }

  void require_same(const Operator& other, const char* who) const {
    if (!(dim_ == other.dim_))
      throw StructuralError(std::string(who) + ": Dim mismatch " + dim_.to_string() + " vs " + other.dim_.to_string());
  }

 private:
  Dim dim_;
  Matrix entries_;
  std::string units_;
  bool hermitian_ = false;
};

/// Normalized pure state.
class StateVector {
 public:
  /// Normalizes `amplitudes`; throws on zero or non-finite norm.
  StateVector(Dim dim, Vector amplitudes) : dim_(std::move(dim)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != static_cast<Eigen::Index>(dim_.total()))
      throw StructuralError("StateVector: " + std::to_string(amplitudes_.size()) + " amplitudes for Dim " +
                            dim_.to_string());
    const double norm = amplitudes_.norm();
    if (!std::isfinite(norm) || norm == 0.0) throw StructuralError("StateVector: zero or non-finite norm");
    amplitudes_ /= norm;
  }

  static StateVector basis(const Dim& dim, std::size_t index) {
    if (index >= dim.total())
      throw StructuralError("StateVector::basis: index " + std::to_string(index) + " out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim.total()));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(dim, std::move(v));
  }

  const Dim& dim() const { return dim_; }
  const Vector& amplitudes() const { return amplitudes_; }

 private:
  Dim dim_;
  Vector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix (validated on construction).
class DensityMatrix {
 public:
  DensityMatrix(Dim dim, Matrix entries) : dim_(std::move(dim)), entries_(std::move(entries)) {
    detail::require_size(dim_, entries_.rows(), entries_.cols(), "DensityMatrix");
    if (!detail::hermitian_within(entries_, kHermitianTol)) throw ContractError("DensityMatrix: not Hermitian");
    if (std::abs(entries_.trace() - Complex(1.0)) > kNormTol)
      throw ContractError("DensityMatrix: trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTol) throw ContractError("DensityMatrix: negative eigenvalue");
  }

  static DensityMatrix from_state(const StateVector& psi) {
    const Vector& a = psi.amplitudes();
    return DensityMatrix(psi.dim(), a * a.adjoint());
  }

  const Dim& dim() const { return dim_; }
  const Matrix& matrix() const { return entries_; }

  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

 private:
  Dim dim_;
  Matrix entries_;
};

/// Unitary operator, checked to kUnitaryTol.
class Unitary {
 public:
  Unitary(Dim dim, Matrix entries) : dim_(std::move(dim)), entries_(std::move(entries)) {
    detail::require_size(dim_, entries_.rows(), entries_.cols(), "Unitary");
    const auto n = entries_.rows();
    if (detail::max_abs(entries_.adjoint() * entries_ - Matrix::Identity(n, n)) > kUnitaryTol)
      throw ContractError("Unitary: U^dagger U differs from identity");
  }

  /// Skips the O(n³) check; for matrices that are unitary by construction
  /// (spectral exponentials, permutations).
  static Unitary assume_unitary(Dim dim, Matrix entries) {
    detail::require_size(dim, entries.rows(), entries.cols(), "Unitary");
    return Unitary(std::move(dim), std::move(entries), Trusted{});
  }

  const Dim& dim() const { return dim_; }
  const Matrix& matrix() const { return entries_; }
  Operator as_operator() const { return Operator(dim_, entries_); }
  Unitary adjoint() const { return Unitary(dim_, entries_.adjoint(), Trusted{}); }

 private:
  struct Trusted {};
  Unitary(Dim dim, Matrix entries, Trusted) : dim_(std::move(dim)), entries_(std::move(entries)) {}

  Dim dim_;
  Matrix entries_;
};

/// Kronecker product of the factors, in order.
inline Operator tensor(std::span<const Operator> factors) {
  if (factors.empty()) throw StructuralError("tensor: empty factor list");
  Dim dim = factors.front().dim();
  Matrix m = factors.front().matrix();
  bool same_units = true;
  for (std::size_t k = 1; k < factors.size(); ++k) {
    dim = dim.concat(factors[k].dim());
    m = detail::kron(m, factors[k].matrix());
    same_units = same_units && factors[k].units() == factors.front().units();
  }
  return Operator(std::move(dim), std::move(m), same_units ? factors.front().units() : std::string{});
}

inline Operator tensor(std::initializer_list<Operator> factors) {
  return tensor(std::span<const Operator>(factors.begin(), factors.size()));
}

/// Lifts `op` to I ⊗ … ⊗ op ⊗ … ⊗ I with op at `slot`.
inline Operator embed(const Operator& op, std::size_t slot, const Dim& dims) {
  if (slot >= dims.rank())
    throw StructuralError("embed: slot " + std::to_string(slot) + " out of range for Dim " + dims.to_string());
  if (op.dim().total() != dims[slot])
    throw StructuralError("embed: operator dimension " + std::to_string(op.dim().total()) + " does not match slot " +
                          std::to_string(slot) + " of Dim " + dims.to_string());
  std::size_t left = 1;
  std::size_t right = 1;
  for (std::size_t k = 0; k < slot; ++k) left *= dims[k];
  for (std::size_t k = slot + 1; k < dims.rank(); ++k) right *= dims[k];
  Matrix m = detail::kron(Matrix::Identity(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(left)),
                          op.matrix());
  m = detail::kron(m, Matrix::Identity(static_cast<Eigen::Index>(right), static_cast<Eigen::Index>(right)));
  return Operator(dims, std::move(m), op.units());
}

inline Operator commutator(const Operator& a, const Operator& b) {
  a.require_same(b, "commutator");
  return Operator(a.dim(), a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

inline void require_same_dim(const Operator& op, const StateVector& psi, const char* who) {
  if (!(op.dim() == psi.dim()))
    throw StructuralError(std::string(who) + ": operator Dim " + op.dim().to_string() + " vs state Dim " +
                          psi.dim().to_string());
}

/// ⟨psi|op|psi⟩.
inline Complex expectation(const Operator& op, const StateVector& psi) {
  require_same_dim(op, psi, "expectation");
  return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

/// sqrt(⟨op²⟩ − ⟨op⟩²), evaluated as ‖(op − ⟨op⟩)ψ‖ so the radicand cannot go negative.
inline double std_dev(const Operator& op, const StateVector& psi) {
  require_same_dim(op, psi, "std_dev");
  if (!op.is_hermitian()) throw ContractError("std_dev: operator is not Hermitian");
  const Vector& a = psi.amplitudes();
  const Vector image = op.matrix() * a;
  const double mean = a.dot(image).real();
  return (image - mean * a).norm();
}

/// exp(−i h t) through the eigendecomposition of h.
inline Unitary unitary_from_generator(const Operator& h, double t) {
  if (!h.is_hermitian()) throw ContractError("unitary_from_generator: generator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const Vector phases = (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
  return Unitary::assume_unitary(h.dim(), es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint());
}

/// exp(−i t x⊗y) from the separate spectra of x and y.
///
/// With x = Σ_i ξ_i P_i the evolution is block diagonal in the eigenbasis of x,
/// U = Σ_i P_i ⊗ exp(−i t ξ_i y), so no diagonalization of the joint generator is needed.
inline Unitary unitary_from_product_generator(const Operator& x, const Operator& y, double t) {
  if (!x.is_hermitian() || !y.is_hermitian())
    throw ContractError("unitary_from_product_generator: factors must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> ex(x.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> ey(y.matrix());
  const auto dx = x.matrix().rows();
  const auto dy = y.matrix().rows();
  const Matrix& vy = ey.eigenvectors();
  Matrix u = Matrix::Zero(dx * dy, dx * dy);
  for (Eigen::Index i = 0; i < dx; ++i) {
    const Vector phases = (ey.eigenvalues().cast<Complex>() * Complex(0.0, -t * ex.eigenvalues()(i))).array().exp();
    const Matrix w = vy * phases.asDiagonal() * vy.adjoint();
    const Vector vi = ex.eigenvectors().col(i);
    const Matrix projector = vi * vi.adjoint();
    for (Eigen::Index a = 0; a < dx; ++a)
      for (Eigen::Index b = 0; b < dx; ++b)
        if (projector(a, b) != Complex(0.0)) u.block(a * dy, b * dy, dy, dy) += projector(a, b) * w;
  }
  return Unitary::assume_unitary(x.dim().concat(y.dim()), std::move(u));
}

namespace detail {

inline std::vector<std::size_t> normalized_slots(std::span<const std::size_t> slots, const Dim& dims, const char* who) {
  std::vector<std::size_t> out(slots.begin(), slots.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw StructuralError(std::string(who) + ": repeated slot");
  for (std::size_t s : out)
    if (s >= dims.rank())
      throw StructuralError(std::string(who) + ": slot " + std::to_string(s) + " out of range for Dim " +
                            dims.to_string());
  return out;
}

// Flat offsets of every multi-index over `slots` (in the listed order), with
// all other digits zero.
inline std::vector<std::size_t> slot_offsets(std::span<const std::size_t> slots, const Dim& dims) {
  const auto strides = dims.strides();
  std::vector<std::size_t> offsets{0};
  for (std::size_t s : slots) {
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * dims[s]);
    for (std::size_t base : offsets)
      for (std::size_t digit = 0; digit < dims[s]; ++digit) next.push_back(base + digit * strides[s]);
    offsets = std::move(next);
  }
  return offsets;
}

inline std::vector<std::size_t> complement(std::span<const std::size_t> slots, std::size_t rank) {
  std::vector<std::size_t> rest;
  for (std::size_t k = 0; k < rank; ++k)
    if (std::find(slots.begin(), slots.end(), k) == slots.end()) rest.push_back(k);
  return rest;
}

}  // namespace detail

/// Applies a matrix acting on the sub-register `slots` (listed order defines the
/// local Kronecker order) to a full state vector over `dims`.
inline Vector apply_local(const Matrix& local, std::span<const std::size_t> slots, const Dim& dims, const Vector& v) {
  detail::normalized_slots(slots, dims, "apply_local");
  if (slots.empty()) throw StructuralError("apply_local: empty slot list");
  if (v.size() != static_cast<Eigen::Index>(dims.total())) throw StructuralError("apply_local: vector size mismatch");
  const auto inner = detail::slot_offsets(slots, dims);
  const auto n = static_cast<Eigen::Index>(inner.size());
  if (local.rows() != n || local.cols() != n)
    throw StructuralError("apply_local: local matrix does not match the selected slots");
  const auto rest = detail::complement(slots, dims.rank());
  const auto outer = detail::slot_offsets(rest, dims);

  Vector out(v.size());
  Vector gathered(n);
  for (std::size_t base : outer) {
    for (Eigen::Index r = 0; r < n; ++r) gathered(r) = v(static_cast<Eigen::Index>(base + inner[r]));
    const Vector image = local * gathered;
    for (Eigen::Index r = 0; r < n; ++r) out(static_cast<Eigen::Index>(base + inner[r])) = image(r);
  }
  return out;
}

/// Reduced state on the kept subsystems (ascending slot order).
inline DensityMatrix partial_trace(const StateVector& psi, std::span<const std::size_t> keep) {
  if (keep.empty()) throw StructuralError("partial_trace: empty keep set");
  const Dim& dims = psi.dim();
  const auto kept = detail::normalized_slots(keep, dims, "partial_trace");
  const auto traced = detail::complement(kept, dims.rank());
  const auto row_offsets = detail::slot_offsets(kept, dims);
  const auto col_offsets = detail::slot_offsets(traced, dims);
  // Coefficient matrix C[k][t] = psi[k ⊕ t]; rho = C C†.
  Matrix c(static_cast<Eigen::Index>(row_offsets.size()), static_cast<Eigen::Index>(col_offsets.size()));
  for (std::size_t r = 0; r < row_offsets.size(); ++r)
    for (std::size_t t = 0; t < col_offsets.size(); ++t)
      c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
          psi.amplitudes()(static_cast<Eigen::Index>(row_offsets[r] + col_offsets[t]));
  Matrix rho = c * c.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(dims.select(kept), std::move(rho));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  if (keep.empty()) throw StructuralError("partial_trace: empty keep set");
  const Dim& dims = rho.dim();
  const auto kept = detail::normalized_slots(keep, dims, "partial_trace");
  const auto traced = detail::complement(kept, dims.rank());
  const auto row_offsets = detail::slot_offsets(kept, dims);
  const auto col_offsets = detail::slot_offsets(traced, dims);
  const auto n = static_cast<Eigen::Index>(row_offsets.size());
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (std::size_t t : col_offsets)
        out(a, b) += rho.matrix()(static_cast<Eigen::Index>(row_offsets[static_cast<std::size_t>(a)] + t),
                                  static_cast<Eigen::Index>(row_offsets[static_cast<std::size_t>(b)] + t));
  return DensityMatrix(dims.select(kept), std::move(out));
}

inline DensityMatrix partial_trace(const StateVector& psi, std::initializer_list<std::size_t> keep) {
  return partial_trace(psi, std::span<const std::size_t>(keep.begin(), keep.size()));
}
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()));
}

/// −Σ λ ln λ over eigenvalues above kEntropyCutoff.
inline double vn_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double lambda : rho.eigenvalues())
    if (lambda > kEntropyCutoff) s -= lambda * std::log(lambda);
  return std::max(s, 0.0);
}

}  // namespace gur
