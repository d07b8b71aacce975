#include "msw/rkhs.hpp"

#include "msw/error.hpp"
#include "msw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace msw::rkhs {

namespace {

constexpr double kRescaleAbove = 1e150;
constexpr double kRescaleFactor = 1e-150;
const double kLogRescale = std::log(kRescaleFactor);

}  // namespace

KernelSpec::KernelSpec(double sigma2, double w) : sigma2_(sigma2), w_(w) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidSpecError("kernel: sigma2 must be positive");
  if (!(w > 0.0) || !std::isfinite(w)) throw InvalidSpecError("kernel: w must be positive");
  a_ = 1.0 / (4.0 * sigma2);
  b_ = 1.0 / (2.0 * w * w);
  c_ = std::sqrt(a_ * a_ + 2.0 * a_ * b_);
  kappa_ = 2.0 * sigma2 / (w * w);
}

double KernelSpec::kernel(double z, double zp) const {
  const double diff = z - zp;
  return std::exp(-diff * diff / (2.0 * w_ * w_));
}

SpectralBasis::SpectralBasis(KernelSpec kernel, std::size_t max_index)
    : kernel_(kernel), max_index_(max_index) {
  if (max_index == 0) throw DomainError("spectral basis: max_index must be positive");
}

double SpectralBasis::decay_ratio() const {
  const auto& k = kernel_;
  return k.b() / (k.a() + k.b() + k.c());
}

double eigenvalue(const SpectralBasis& basis, std::size_t j) {
  if (j >= basis.max_index()) throw DomainError("eigenvalue: index beyond basis size");
  const auto& k = basis.kernel();
  const double denom = k.a() + k.b() + k.c();
  const double log_lambda =
      0.5 * std::log(2.0 * k.a() / denom) + static_cast<double>(j) * std::log(k.b() / denom);
  return std::exp(log_lambda);
}

std::vector<double> eigenfunctions(const SpectralBasis& basis, double z, std::size_t count) {
  if (count > basis.max_index()) throw DomainError("eigenfunctions: count beyond basis size");
  std::vector<double> out(count, 0.0);
  if (count == 0) return out;
  const auto& k = basis.kernel();
  const double y = std::sqrt(2.0 * k.c()) * z;
  // psi_j(z) = (c/a)^{1/4} pi^{1/4} e^{a z^2} h_j(y) with h_0(y) = pi^{-1/4} e^{-y^2/2};
  // the Gaussian factors collapse to e^{(a-c) z^2}, carried as a log scale.
  double log_scale = (k.a() - k.c()) * z * z + 0.25 * std::log(k.c() / k.a());
  double prev = 0.0;
  double cur = 1.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double value = cur * std::exp(log_scale);
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "eigenfunction: psi_" << j << "(" << z << ") is not representable";
      throw NumericError(msg.str());
    }
    out[j] = value;
    const auto jj = static_cast<double>(j);
    const double next = y * std::sqrt(2.0 / (jj + 1.0)) * cur - std::sqrt(jj / (jj + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleFactor;
      prev *= kRescaleFactor;
      log_scale -= kLogRescale;
    }
  }
  return out;
}

double eigenfunction(const SpectralBasis& basis, std::size_t j, double z) {
  return eigenfunctions(basis, z, j + 1).back();
}

Vector feature_coords(const SpectralBasis& basis, double z, std::size_t d_test) {
  if (d_test == 0) throw DomainError("feature_coords: d_test must be positive");
  const auto psi = eigenfunctions(basis, z, d_test);
  Vector coords(static_cast<Eigen::Index>(d_test));
  for (std::size_t j = 0; j < d_test; ++j) {
    coords[static_cast<Eigen::Index>(j)] = std::sqrt(eigenvalue(basis, j)) * psi[j];
  }
  return coords;
}

double mercer_sum(const SpectralBasis& basis, double z, double zp, std::size_t terms,
                  MercerWeighting weighting) {
  const auto psi = eigenfunctions(basis, z, terms);
  const auto psi_p = eigenfunctions(basis, zp, terms);
  double sum = 0.0;
  for (std::size_t j = 0; j < terms; ++j) {
    const double lambda = eigenvalue(basis, j);
    const double weight = weighting == MercerWeighting::Lambda ? lambda : std::sqrt(lambda);
    sum += weight * psi[j] * psi_p[j];
  }
  return sum;
}

SpectrumReport check_spectrum(const SpectralBasis& basis, std::size_t J, std::size_t quad_nodes,
                              std::size_t residual_nodes, std::size_t grid_points) {
  if (J == 0) throw DomainError("check_spectrum: J must be positive");
  if (quad_nodes < J + 1) throw DomainError("check_spectrum: need at least J + 1 quadrature nodes");
  if (residual_nodes < J + 1) throw DomainError("check_spectrum: need at least J + 1 residual nodes");
  if (grid_points < 2) throw DomainError("check_spectrum: need at least two grid points");
  const auto& k = basis.kernel();
  const double a = k.a();
  const double b = k.b();
  const double c = k.c();
  const double density_norm = std::sqrt(2.0 * a / std::numbers::pi);

  SpectrumReport report;
  report.eigenpairs = J;
  report.quad_nodes = quad_nodes;

  // Orthonormality: t = sqrt(2c) z turns psi_j psi_k dm into a polynomial times e^{-t^2}.
  const auto gh = quadrature::gauss_hermite(quad_nodes);
  const double scale = std::sqrt(2.0 * c);
  std::vector<std::vector<double>> psi_at(quad_nodes);
  std::vector<double> omega(quad_nodes);
  for (std::size_t q = 0; q < quad_nodes; ++q) {
    const double t = gh.nodes[q];
    const double z = t / scale;
    psi_at[q] = eigenfunctions(basis, z, J);
    omega[q] = gh.weights[q] * std::exp(t * t - 2.0 * a * z * z) * density_norm / scale;
  }
  report.gram = Matrix::Zero(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(J));
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t l = j; l < J; ++l) {
      double sum = 0.0;
      for (std::size_t q = 0; q < quad_nodes; ++q) sum += omega[q] * psi_at[q][j] * psi_at[q][l];
      report.gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = sum;
      report.gram(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = sum;
    }
  }
  const Matrix identity = Matrix::Identity(report.gram.rows(), report.gram.cols());
  report.max_orthonormality_error = (report.gram - identity).cwiseAbs().maxCoeff();
  report.max_asymmetry = (report.gram - report.gram.transpose()).cwiseAbs().maxCoeff();

  // Eigen-residuals: the z-integrand of T_K psi_j(z') is a Gaussian centred at b z'/alpha
  // with precision alpha = a + b + c, times a polynomial; Gauss-Hermite after the shift.
  const auto gh_res = quadrature::gauss_hermite(residual_nodes);
  const double alpha = a + b + c;
  const double root_alpha = std::sqrt(alpha);
  const double sigma = std::sqrt(k.sigma2());
  report.grid.resize(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    report.grid[g] = -3.0 * sigma + 6.0 * sigma * static_cast<double>(g) / static_cast<double>(grid_points - 1);
  }
  report.eigen_residuals.assign(J, 0.0);
  for (double zp : report.grid) {
    const auto psi_p = eigenfunctions(basis, zp, J);
    const double centre = b * zp / alpha;
    std::vector<double> integral(J, 0.0);
    for (std::size_t q = 0; q < residual_nodes; ++q) {
      const double u = gh_res.nodes[q];
      const double z = centre + u / root_alpha;
      const auto psi = eigenfunctions(basis, z, J);
      const double weight = gh_res.weights[q] * std::exp(u * u - 2.0 * a * z * z) * density_norm *
                            k.kernel(z, zp) / root_alpha;
      for (std::size_t j = 0; j < J; ++j) integral[j] += weight * psi[j];
    }
    for (std::size_t j = 0; j < J; ++j) {
      const double residual = std::abs(integral[j] - eigenvalue(basis, j) * psi_p[j]);
      report.eigen_residuals[j] = std::max(report.eigen_residuals[j], residual);
    }
  }
  report.max_eigen_residual = *std::max_element(report.eigen_residuals.begin(), report.eigen_residuals.end());
  return report;
}

AssumptionReport check_assumptions(const KernelSpec& spec, double eta2, double p) {
  if (!(eta2 > 0.0)) throw DomainError("check_assumptions: eta2 must be positive");
  if (!(p >= 1.0)) throw DomainError("check_assumptions: p must be >= 1");
  AssumptionReport report;
  report.kappa = spec.kappa();
  report.exponential_decay = report.kappa >= 4.0;
  report.gamma = 1.0;
  report.s_lower = 2.0 * p;
  report.s_upper = 2.0 * spec.sigma2() / eta2;
  report.moment_range_nonempty = report.s_upper > report.s_lower;
  if (report.moment_range_nonempty) report.suggested_s = 0.5 * (report.s_lower + report.s_upper);
  return report;
}

}  // namespace msw::rkhs
