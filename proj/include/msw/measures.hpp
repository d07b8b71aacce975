#pragma once

#include "msw/rkhs.hpp"
#include "msw/rng.hpp"
#include "msw/sample_matrix.hpp"

#include <cstddef>
#include <variant>

namespace msw {

struct GaussianSpec {
  Vector mean;
  Matrix covariance;
};

/// Product of d independent Pareto(shape) laws with CDF 1 - x^{-shape} on [1, inf).
struct ParetoProductSpec {
  double shape = 0.0;
  std::size_t d = 1;
};

/// Law of the truncated feature map applied to z ~ N(0, source_variance).
struct RkhsPushforwardSpec {
  rkhs::KernelSpec kernel;
  double source_variance = 1.0;
  std::size_t d_test = 1;
};

using DistributionSpec = std::variant<GaussianSpec, ParetoProductSpec, RkhsPushforwardSpec>;

/// Ambient dimension of samples drawn from `spec`.
std::size_t dimension(const DistributionSpec& spec);

/// Throws InvalidSpecError when `spec` breaks its invariants.
void validate(const DistributionSpec& spec);

/// Lower-triangular L with L L^T equal to the symmetrized covariance, adding diagonal
/// jitter 1e-12, 1e-11, 1e-10 on successive failures. Throws InvalidSpecError otherwise.
Matrix cholesky_factor(const Matrix& covariance);

/// Equicorrelated covariance: ones on the diagonal, `rho` elsewhere.
Matrix equicorrelated(std::size_t d, double rho);

/// Pareto inverse CDF (1 - u)^{-1/shape}; u in [0, 1).
double pareto_quantile(double u, double shape);

/// n i.i.d. draws. Throws DomainError for n == 0.
SampleMatrix sample(const DistributionSpec& spec, std::size_t n, RngStream& rng);

/// (1/n) sum_i |x_i|^s with the Euclidean norm.
double moment_empirical(const SampleMatrix& samples, double s);

/// Closed-form upper bound on the s-th moment for Gaussian(0, I) and Pareto products;
/// +infinity when the moment diverges. Throws UnsupportedError for other specs.
double moment_bound(const DistributionSpec& spec, double s);

}  // namespace msw
