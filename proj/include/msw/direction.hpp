#pragma once

#include "msw/sample_matrix.hpp"

#include <cstddef>

namespace msw {

/// Unit vector on the sphere S^{d-1}; |coords| within 1e-12 of one.
class Direction {
 public:
  /// Throws DomainError when the norm is off by more than 1e-12.
  explicit Direction(Vector coords);
  /// Scales `v` to unit length. Throws DomainError for zero or non-finite input.
  static Direction normalized(const Vector& v);
  /// First coordinate axis in dimension d.
  static Direction axis(std::size_t d, std::size_t k = 0);

  const Vector& coords() const { return coords_; }
  std::size_t d() const { return static_cast<std::size_t>(coords_.size()); }

 private:
  Vector coords_;
};

}  // namespace msw
