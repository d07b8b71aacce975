#pragma once

#include "msw/sample_matrix.hpp"

#include <cstddef>
#include <vector>

namespace msw {

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;
};

/// Exact minimum-cost perfect matching on a square cost matrix (Hungarian method with
/// potentials, O(n^3)). Throws DomainError for non-square or non-finite input.
Assignment solve_assignment(const Matrix& cost);

}  // namespace msw
