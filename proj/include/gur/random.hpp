#pragma once

#include <cstddef>
#include <random>

#include "gur/operator_algebra.hpp"

namespace gur {

/// Gaussian (GUE-like) Hermitian matrix (X + X†)/2 on a single d-level register.
template <class Rng>
Operator random_hermitian(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(d);
  Matrix x(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = Complex(normal(rng), normal(rng));
  return Operator(Dim{d}, 0.5 * (x + x.adjoint()));
}

/// Haar-distributed pure state over `dim`.
template <class Rng>
StateVector random_state(const Dim& dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim.total()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(normal(rng), normal(rng));
  return StateVector(dim, std::move(v));
}

}  // namespace gur
