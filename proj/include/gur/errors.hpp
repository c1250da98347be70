#pragma once

#include <stdexcept>
#include <string>

namespace gur {

// Shape and bookkeeping failures: wrong dimensions, bad slots, empty lists,
// invalid constructor parameters, dimension cap exceeded.
class StructuralError : public std::invalid_argument {
 public:
  explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

// Mathematical precondition failures: non-Hermitian observable, non-unitary
// evolution, invalid density matrix.
class ContractError : public std::domain_error {
 public:
  explicit ContractError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace gur
