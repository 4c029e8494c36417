#pragma once

#include <stdexcept>
#include <string>

namespace swdgp {

/// Thrown when a banded kernel approximation loses positive definiteness,
/// i.e. the smallest analytic eigenvalue is not strictly positive.
class PositivityError : public std::runtime_error {
public:
  PositivityError(const std::string& what, double smallest_eigenvalue)
      : std::runtime_error(what), smallest_eigenvalue_(smallest_eigenvalue) {}

  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }

private:
  double smallest_eigenvalue_;
};

/// Thrown when a dense kernel matrix cannot be Cholesky-factorized.
class FactorizationError : public std::runtime_error {
public:
  FactorizationError(const std::string& what, double smallest_pivot)
      : std::runtime_error(what), smallest_pivot_(smallest_pivot) {}

  double smallest_pivot() const noexcept { return smallest_pivot_; }

private:
  double smallest_pivot_;
};

}  // namespace swdgp
