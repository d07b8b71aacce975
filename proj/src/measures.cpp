#include "msw/measures.hpp"

#include "msw/error.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>

namespace msw {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_standard_gaussian(const GaussianSpec& g) {
  const auto d = g.mean.size();
  return g.mean.isZero(0.0) && (g.covariance - Matrix::Identity(d, d)).isZero(0.0);
}

}  // namespace

std::size_t dimension(const DistributionSpec& spec) {
  return std::visit(Overloaded{
                        [](const GaussianSpec& g) { return static_cast<std::size_t>(g.mean.size()); },
                        [](const ParetoProductSpec& p) { return p.d; },
                        [](const RkhsPushforwardSpec& r) { return r.d_test; },
                    },
                    spec);
}

Matrix cholesky_factor(const Matrix& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw InvalidSpecError("covariance must be a nonempty square matrix");
  }
  if (!covariance.allFinite()) throw InvalidSpecError("covariance entries must be finite");
  const Matrix sym = 0.5 * (covariance + covariance.transpose());
  const auto d = sym.rows();
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::LLT<Matrix> llt(sym + jitter * Matrix::Identity(d, d));
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = attempt == 0 ? 1e-12 : jitter * 10.0;
  }
  throw InvalidSpecError("covariance is not positive semi-definite");
}

Matrix equicorrelated(std::size_t d, double rho) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix m = Matrix::Constant(n, n, rho);
  m.diagonal().setOnes();
  return m;
}

void validate(const DistributionSpec& spec) {
  std::visit(Overloaded{
                 [](const GaussianSpec& g) {
                   if (g.mean.size() == 0) throw InvalidSpecError("gaussian: empty mean");
                   if (!g.mean.allFinite()) throw InvalidSpecError("gaussian: mean must be finite");
                   if (g.covariance.rows() != g.mean.size() || g.covariance.cols() != g.mean.size()) {
                     throw InvalidSpecError("gaussian: covariance shape does not match mean");
                   }
                   cholesky_factor(g.covariance);
                 },
                 [](const ParetoProductSpec& p) {
                   if (!(p.shape > 0.0) || !std::isfinite(p.shape)) throw InvalidSpecError("pareto: shape must be positive");
                   if (p.d == 0) throw InvalidSpecError("pareto: dimension must be positive");
                 },
                 [](const RkhsPushforwardSpec& r) {
                   if (!(r.source_variance > 0.0) || !std::isfinite(r.source_variance)) {
                     throw InvalidSpecError("rkhs pushforward: source variance must be positive");
                   }
                   if (r.d_test == 0) throw InvalidSpecError("rkhs pushforward: d_test must be positive");
                 },
             },
             spec);
}

double pareto_quantile(double u, double shape) { return std::pow(1.0 - u, -1.0 / shape); }

SampleMatrix sample(const DistributionSpec& spec, std::size_t n, RngStream& rng) {
  if (n == 0) throw DomainError("sample: n must be positive");
  validate(spec);
  const auto rows = static_cast<Eigen::Index>(n);
  return std::visit(
      Overloaded{
          [&](const GaussianSpec& g) {
            const Matrix chol = cholesky_factor(g.covariance);
            const auto d = g.mean.size();
            RowMatrix out(rows, d);
            Vector z(d);
            for (Eigen::Index i = 0; i < rows; ++i) {
              for (Eigen::Index k = 0; k < d; ++k) z[k] = rng.normal();
              out.row(i) = (g.mean + chol.triangularView<Eigen::Lower>() * z).transpose();
            }
            return SampleMatrix(std::move(out));
          },
          [&](const ParetoProductSpec& p) {
            RowMatrix out(rows, static_cast<Eigen::Index>(p.d));
            for (Eigen::Index i = 0; i < rows; ++i) {
              for (Eigen::Index k = 0; k < out.cols(); ++k) out(i, k) = pareto_quantile(rng.uniform(), p.shape);
            }
            return SampleMatrix(std::move(out));
          },
          [&](const RkhsPushforwardSpec& r) {
            const rkhs::SpectralBasis basis(r.kernel, std::max<std::size_t>(r.d_test, 1));
            const double sd = std::sqrt(r.source_variance);
            RowMatrix out(rows, static_cast<Eigen::Index>(r.d_test));
            for (Eigen::Index i = 0; i < rows; ++i) {
              out.row(i) = rkhs::feature_coords(basis, sd * rng.normal(), r.d_test).transpose();
            }
            return SampleMatrix(std::move(out));
          },
      },
      spec);
}

double moment_empirical(const SampleMatrix& samples, double s) {
  if (!(s >= 1.0)) throw DomainError("moment_empirical: s must be >= 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.n(); ++i) sum += std::pow(samples.row(i).norm(), s);
  return sum / static_cast<double>(samples.n());
}

double moment_bound(const DistributionSpec& spec, double s) {
  return std::visit(
      Overloaded{
          [&](const GaussianSpec& g) -> double {
            if (!is_standard_gaussian(g)) throw UnsupportedError("moment_bound: only Gaussian(0, I) is supported");
            const auto d = static_cast<double>(g.mean.size());
            return std::pow(d, s) * std::pow(2.0, s / 2.0) * std::tgamma((s + 1.0) / 2.0) /
                   std::sqrt(std::numbers::pi);
          },
          [&](const ParetoProductSpec& p) -> double {
            if (s >= p.shape) return std::numeric_limits<double>::infinity();
            return std::pow(static_cast<double>(p.d), s) * p.shape / (p.shape - s);
          },
          [](const RkhsPushforwardSpec&) -> double {
            throw UnsupportedError("moment_bound: no closed form for RKHS pushforward laws");
          },
      },
      spec);
}

}  // namespace msw
