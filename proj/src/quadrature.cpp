#include "msw/quadrature.hpp"

#include "msw/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace msw::quadrature {

Rule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: n must be positive");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = ((2.0 * jj + 1.0) * z * p2 - jj * p3) / (jj + 1.0);
      }
      dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double z_prev = z;
      z = z_prev - p1 / dp;
      if (std::abs(z - z_prev) <= 1e-15) break;
    }
    // Recompute the derivative at the converged node.
    {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = ((2.0 * jj + 1.0) * z * p2 - jj * p3) / (jj + 1.0);
      }
      dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Rule gauss_hermite(std::size_t n) {
  if (n == 0) throw DomainError("gauss_hermite: n must be positive");
  Rule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  if (n == 1) {
    rule.weights[0] = std::sqrt(std::numbers::pi);
    return rule;
  }
  // Starting points from the Jacobi matrix, then Newton on the orthonormal Hermite
  // functions phi_j(z) = p_j(z) e^{-z^2/2}, which stay bounded for large n and z.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n - 1));
  for (std::size_t k = 1; k < n; ++k) sub[static_cast<Eigen::Index>(k - 1)] = std::sqrt(0.5 * static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> jacobi;
  jacobi.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (jacobi.info() != Eigen::Success) throw NumericError("gauss_hermite: eigenvalue solver failed");
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const auto nd = static_cast<double>(n);
  // phi_n(z) and phi_{n-1}(z).
  auto evaluate = [&](double z, double& last, double& before) {
    double p1 = pim4 * std::exp(-0.5 * z * z);
    double p2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      const auto jj = static_cast<double>(j);
      p1 = z * std::sqrt(2.0 / (jj + 1.0)) * p2 - std::sqrt(jj / (jj + 1.0)) * p3;
    }
    last = p1;
    before = p2;
  };
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = jacobi.eigenvalues()[static_cast<Eigen::Index>(n - 1 - i)];
    double last = 0.0;
    double before = 0.0;
    for (int iter = 0; iter < 50; ++iter) {
      evaluate(z, last, before);
      // phi_n' = sqrt(2n) phi_{n-1} - z phi_n, and phi_n = 0 at a root.
      const double step = last / (std::sqrt(2.0 * nd) * before - z * last);
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    evaluate(z, last, before);
    // w = 2 / (2n p_{n-1}(z)^2) = e^{-z^2} / (n phi_{n-1}(z)^2).
    const double w = 1.0 / (nd * before * before) * std::exp(-z * z);
    rule.nodes[n - 1 - i] = z;
    rule.nodes[i] = -z;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) {
    double last = 0.0;
    double before = 0.0;
    evaluate(0.0, last, before);
    rule.nodes[n / 2] = 0.0;
    rule.weights[n / 2] = 1.0 / (nd * before * before);
  }
  return rule;
}

const Rule& gauss_legendre_cached(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(gauss_legendre(n));
  return *slot;
}

}  // namespace msw::quadrature
