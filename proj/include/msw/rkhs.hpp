#pragma once

#include "msw/sample_matrix.hpp"

#include <cstddef>
#include <vector>

namespace msw::rkhs {

/// Gaussian kernel K(z,z') = exp(-(z-z')^2 / (2 w^2)) under base measure N(0, sigma2).
class KernelSpec {
 public:
  /// Throws InvalidSpecError unless sigma2 > 0 and w > 0.
  KernelSpec(double sigma2, double w);

  double sigma2() const { return sigma2_; }
  double w() const { return w_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  /// kappa = b / a = 2 sigma2 / w^2.
  double kappa() const { return kappa_; }

  double kernel(double z, double zp) const;

 private:
  double sigma2_;
  double w_;
  double a_;
  double b_;
  double c_;
  double kappa_;
};

/// Mercer eigensystem of the kernel, eigenpairs 0..max_index-1 (index starts at 0).
class SpectralBasis {
 public:
  explicit SpectralBasis(KernelSpec kernel, std::size_t max_index = 4096);

  const KernelSpec& kernel() const { return kernel_; }
  std::size_t max_index() const { return max_index_; }

  /// b / (a + b + c), the common ratio lambda_{j+1} / lambda_j.
  double decay_ratio() const;

 private:
  KernelSpec kernel_;
  std::size_t max_index_;
};

/// lambda_j = sqrt(2a/(a+b+c)) (b/(a+b+c))^j, evaluated in log space.
double eigenvalue(const SpectralBasis& basis, std::size_t j);

/// psi_j(z), via orthonormal Hermite functions with running rescaling.
/// Throws NumericError when the result is not representable.
double eigenfunction(const SpectralBasis& basis, std::size_t j, double z);

/// psi_0(z), ..., psi_{count-1}(z) from a single recurrence pass.
std::vector<double> eigenfunctions(const SpectralBasis& basis, double z, std::size_t count);

/// Coordinates sqrt(lambda_j) psi_j(z), j < d_test, of the truncated feature map.
Vector feature_coords(const SpectralBasis& basis, double z, std::size_t d_test);

enum class MercerWeighting { Lambda, SqrtLambda };

/// Partial Mercer sum over j < terms of w_j psi_j(z) psi_j(z'), w_j = lambda_j or sqrt(lambda_j).
double mercer_sum(const SpectralBasis& basis, double z, double zp, std::size_t terms,
                  MercerWeighting weighting = MercerWeighting::Lambda);

struct SpectrumReport {
  std::size_t eigenpairs = 0;
  std::size_t quad_nodes = 0;
  /// G(j,k) = integral of psi_j psi_k dm.
  Matrix gram;
  double max_orthonormality_error = 0.0;  // max |G - I|
  double max_asymmetry = 0.0;             // max |G - G^T|
  std::vector<double> grid;               // z' points of the residual check
  std::vector<double> eigen_residuals;    // per j: max over grid of |T_K psi_j - lambda_j psi_j|
  double max_eigen_residual = 0.0;
};

/// Quadrature verification of orthonormality and of T_K psi_j = lambda_j psi_j.
/// Residuals use `residual_nodes` Gauss-Hermite nodes on `grid_points` z' values in
/// [-3 sigma, 3 sigma]. Throws DomainError when quad_nodes < J + 1.
SpectrumReport check_spectrum(const SpectralBasis& basis, std::size_t J, std::size_t quad_nodes,
                              std::size_t residual_nodes = 128, std::size_t grid_points = 25);

struct AssumptionReport {
  double kappa = 0.0;
  bool exponential_decay = false;  // kappa >= 4
  double gamma = 1.0;
  double s_lower = 0.0;  // 2p, exclusive
  double s_upper = 0.0;  // 2 sigma2 / eta2, exclusive
  bool moment_range_nonempty = false;
  /// Midpoint of the admissible s range when it is nonempty, otherwise 0.
  double suggested_s = 0.0;
};

AssumptionReport check_assumptions(const KernelSpec& spec, double eta2, double p);

}  // namespace msw::rkhs
