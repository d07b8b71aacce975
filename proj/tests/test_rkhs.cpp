#include "msw/error.hpp"
#include "msw/rkhs.hpp"
#include "msw/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace msw;
using namespace msw::rkhs;

namespace {

// Physicists' Hermite polynomials and the unnormalized closed form, in long double.
double direct_eigenfunction(const KernelSpec& k, std::size_t j, double z) {
  const long double y = std::sqrt(2.0L * k.c()) * z;
  long double h_prev = 1.0L;
  long double h = 2.0L * y;
  if (j == 0) h = h_prev;
  for (std::size_t i = 1; i < j; ++i) {
    const long double next = 2.0L * y * h - 2.0L * static_cast<long double>(i) * h_prev;
    h_prev = h;
    h = next;
  }
  long double norm = std::sqrt(static_cast<long double>(k.a()) / k.c());
  for (std::size_t i = 1; i <= j; ++i) norm *= 2.0L * static_cast<long double>(i);
  return static_cast<double>(std::exp(-(static_cast<long double>(k.c()) - k.a()) * z * z) * h / std::sqrt(norm));
}

double lower_sandwich(const KernelSpec& k, std::size_t j) {
  const double kappa = k.kappa();
  return std::sqrt(2.0 / (1.0 + kappa + std::sqrt(1.0 + 2.0 * kappa))) * std::pow(0.5, static_cast<double>(j));
}

}  // namespace

TEST_CASE("kernel constants and the three identities") {
  const KernelSpec unit(0.25, std::sqrt(0.125));
  CHECK(unit.a() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(unit.b() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(unit.c() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(KernelSpec(4.0, 1.0).kappa() == doctest::Approx(8.0).epsilon(1e-15));

  // Both sides in long double from the stored constants; kappa in [1, 100].
  RngStream rng(21, 0);
  for (int i = 0; i < 100; ++i) {
    const double sigma2 = std::exp(std::log(100.0) * rng.uniform() - std::log(10.0));
    const double kappa = std::exp(std::log(100.0) * rng.uniform());
    const KernelSpec k(sigma2, std::sqrt(2.0 * sigma2 / kappa));
    const long double a = k.a(), b = k.b(), c = k.c();
    auto rel = [](long double x, long double y) { return static_cast<double>(std::abs(x - y) / std::abs(y)); };
    CHECK(rel(a * a + 2.0L * a * b, c * c) <= 1e-14);
    CHECK(rel(b * (a + c) / (a + b + c), c - a) <= 1e-14);
    CHECK(rel(std::sqrt((a + b - c) / (a + b + c)), b / (a + b + c)) <= 1e-14);
  }
  CHECK_THROWS_AS(KernelSpec(0.0, 1.0), InvalidSpecError);
  CHECK_THROWS_AS(KernelSpec(1.0, -1.0), InvalidSpecError);
}

TEST_CASE("eigenvalue examples") {
  const SpectralBasis unit(KernelSpec(0.25, std::sqrt(0.125)));
  CHECK(eigenvalue(unit, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eigenvalue(unit, 3) == doctest::Approx(0.0625).epsilon(1e-14));
  for (std::size_t j = 0; j <= 50; ++j) {
    CHECK(test::relative_error(eigenvalue(unit, j), std::ldexp(1.0, -static_cast<int>(j + 1))) <= 1e-12);
  }
  const SpectralBasis fig(KernelSpec(4.0, 1.0));
  const double a = 1.0 / 16.0, b = 0.5, c = std::sqrt(17.0) / 16.0;
  CHECK(eigenvalue(fig, 0) == doctest::Approx(std::sqrt(2.0 * a / (a + b + c))).epsilon(1e-14));
  CHECK(eigenvalue(fig, 0) == doctest::Approx(0.39038).epsilon(1e-5));
  for (std::size_t j = 0; j < 40; ++j) {
    CHECK(test::relative_error(eigenvalue(fig, j + 1) / eigenvalue(fig, j), fig.decay_ratio()) <= 1e-13);
  }
}

TEST_CASE("eigenvalues decrease strictly and satisfy the sandwich for kappa >= 4") {
  RngStream rng(22, 0);
  for (int i = 0; i < 20; ++i) {
    const double sigma2 = std::exp(4.0 * rng.uniform() - 2.0);
    const double kappa = 4.0 + 20.0 * rng.uniform();
    const KernelSpec k(sigma2, std::sqrt(2.0 * sigma2 / kappa));
    const SpectralBasis basis(k);
    const double rate = std::log((k.a() + k.b() + k.c()) / k.b());
    CHECK(rate > 0.0);
    for (std::size_t j = 0; j <= 200; ++j) {
      const double lambda = eigenvalue(basis, j);
      CHECK(lambda > 0.0);
      CHECK(lambda <= 0.5);
      CHECK(lambda >= lower_sandwich(k, j) * (1.0 - 1e-12));
      CHECK(lambda <= 0.5 * std::exp(-rate * static_cast<double>(j)) * (1.0 + 1e-12));
      if (j > 0) CHECK(lambda < eigenvalue(basis, j - 1));
    }
  }
}

TEST_CASE("eigenfunction examples and the direct-recurrence oracle") {
  const SpectralBasis unit(KernelSpec(0.25, std::sqrt(0.125)));
  CHECK(eigenfunction(unit, 0, 0.0) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-14));
  CHECK(eigenfunction(unit, 1, 0.0) == 0.0);
  for (const auto& basis : {unit, SpectralBasis(KernelSpec(4.0, 1.0)), SpectralBasis(KernelSpec(0.7, 2.3))}) {
    const double sd = std::sqrt(basis.kernel().sigma2());
    for (std::size_t j = 0; j <= 10; ++j) {
      for (int i = -12; i <= 12; ++i) {
        const double z = 0.25 * i * sd;
        const double stable = eigenfunction(basis, j, z);
        const double direct = direct_eigenfunction(basis.kernel(), j, z);
        if (std::abs(direct) < 1e-12) {
          CHECK(std::abs(stable - direct) <= 1e-12);
        } else {
          CHECK(test::relative_error(stable, direct) <= 1e-9);
        }
      }
    }
    const auto all = eigenfunctions(basis, 0.37 * sd, 40);
    for (std::size_t j = 0; j < 40; ++j) CHECK(all[j] == doctest::Approx(eigenfunction(basis, j, 0.37 * sd)));
  }
}

TEST_CASE("eigenfunction far tails underflow to zero and non-finite input is reported") {
  const SpectralBasis basis(KernelSpec(4.0, 1.0));
  CHECK(eigenfunction(basis, 3, 1e6) == 0.0);
  CHECK_THROWS_AS(eigenfunction(basis, 3, std::nan("")), NumericError);
  CHECK_THROWS_AS(eigenfunction(basis, 3, INFINITY), NumericError);
}

TEST_CASE("feature coordinates") {
  const SpectralBasis unit(KernelSpec(0.25, std::sqrt(0.125)));
  const Vector c = feature_coords(unit, 0.0, 2);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == doctest::Approx(std::sqrt(0.5) * std::pow(3.0, 0.25)).epsilon(1e-14));
  CHECK(c[0] == doctest::Approx(0.93060).epsilon(1e-5));
  CHECK(c[1] == 0.0);
  const Vector one = feature_coords(unit, 0.4, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == doctest::Approx(std::sqrt(eigenvalue(unit, 0)) * eigenfunction(unit, 0, 0.4)));
  CHECK_THROWS_AS(feature_coords(unit, 0.0, 0), DomainError);
}

TEST_CASE("Mercer reconstruction pins the lambda weighting") {
  for (const auto& kernel : {KernelSpec(4.0, 1.0), KernelSpec(0.25, std::sqrt(0.125))}) {
    const SpectralBasis basis(kernel);
    const double sd = std::sqrt(kernel.sigma2());
    double worst_lambda = 0.0;
    double worst_sqrt = 0.0;
    for (int i = 0; i < 9; ++i) {
      for (int k = 0; k < 9; ++k) {
        const double z = -3.0 * sd + 0.75 * sd * i;
        const double zp = -3.0 * sd + 0.75 * sd * k;
        const double exact = kernel.kernel(z, zp);
        worst_lambda = std::max(worst_lambda, std::abs(mercer_sum(basis, z, zp, 60) - exact));
        worst_sqrt = std::max(worst_sqrt,
                              std::abs(mercer_sum(basis, z, zp, 60, MercerWeighting::SqrtLambda) - exact));
        const Vector cz = feature_coords(basis, z, 60);
        const Vector czp = feature_coords(basis, zp, 60);
        CHECK(std::abs(cz.dot(czp) - exact) <= 1e-8);
      }
    }
    CHECK(worst_lambda <= 1e-8);
    CHECK(worst_sqrt > 1e-2);
  }
}

TEST_CASE("check_spectrum: orthonormality, symmetry and eigen-residuals") {
  const SpectralBasis unit(KernelSpec(0.25, std::sqrt(0.125)));
  const auto report = check_spectrum(unit, 30, 64);
  CHECK(report.max_orthonormality_error <= 1e-8);
  CHECK(report.max_asymmetry == 0.0);
  REQUIRE(report.eigen_residuals.size() == 30);
  for (std::size_t j = 0; j <= 15; ++j) CHECK(report.eigen_residuals[j] <= 1e-6 * eigenvalue(unit, 0));
  CHECK(report.grid.front() == doctest::Approx(-1.5));
  CHECK(report.grid.back() == doctest::Approx(1.5));
  CHECK(report.grid.size() == 25);

  const SpectralBasis fig(KernelSpec(4.0, 1.0));
  const auto wide = check_spectrum(fig, 30, 64);
  CHECK(wide.max_orthonormality_error <= 1e-8);
  for (std::size_t j = 0; j <= 15; ++j) CHECK(wide.eigen_residuals[j] <= 1e-6 * eigenvalue(fig, 0));

  CHECK_THROWS_AS(check_spectrum(unit, 30, 30), DomainError);
}

TEST_CASE("assumption checks") {
  const auto fig = check_assumptions(KernelSpec(4.0, 1.0), 1.0, 2.0);
  CHECK(fig.kappa == doctest::Approx(8.0));
  CHECK(fig.exponential_decay);
  CHECK(fig.s_lower == doctest::Approx(4.0));
  CHECK(fig.s_upper == doctest::Approx(8.0));
  CHECK(fig.moment_range_nonempty);
  CHECK(fig.suggested_s == doctest::Approx(6.0));

  const auto narrow = check_assumptions(KernelSpec(1.0, 1.0), 1.0, 2.0);
  CHECK(narrow.kappa == doctest::Approx(2.0));
  CHECK_FALSE(narrow.exponential_decay);

  const auto empty = check_assumptions(KernelSpec(4.0, 1.0), 4.0, 2.0);
  CHECK(empty.s_upper == doctest::Approx(2.0));
  CHECK_FALSE(empty.moment_range_nonempty);
}
