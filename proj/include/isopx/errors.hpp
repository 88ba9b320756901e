#pragma once

#include <stdexcept>
#include <string>

namespace isopx {

// Precondition violations: bad arguments, dimension mismatch, unsupported kind.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Spherical operations on dimensions where the boundary is degenerate.
class unsupported_dimension : public domain_error {
 public:
  using domain_error::domain_error;
};

}  // namespace isopx
