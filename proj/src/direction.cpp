#include "msw/direction.hpp"

#include "msw/error.hpp"

#include <cmath>

namespace msw {

Direction::Direction(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() == 0) throw DomainError("direction: empty vector");
  const double norm = coords_.norm();
  if (!(std::abs(norm - 1.0) <= 1e-12)) throw DomainError("direction: vector is not unit length");
}

Direction Direction::normalized(const Vector& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("direction: cannot normalize zero or non-finite vector");
  return Direction(v / norm);
}

Direction Direction::axis(std::size_t d, std::size_t k) {
  if (k >= d) throw DomainError("direction: axis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
  v[static_cast<Eigen::Index>(k)] = 1.0;
  return Direction(std::move(v));
}

}  // namespace msw
