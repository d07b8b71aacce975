#pragma once

#include <cstddef>
#include <vector>

namespace msw::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n - 1.
Rule gauss_legendre(std::size_t n);

/// Gauss-Hermite rule for the weight exp(-t^2) on the real line.
/// Nodes ascending. Newton iteration on orthonormal Hermite polynomials, so weights
/// keep full relative accuracy even in the far tails.
Rule gauss_hermite(std::size_t n);

/// Cached copy shared across threads; built once per n.
const Rule& gauss_legendre_cached(std::size_t n);

}  // namespace msw::quadrature
