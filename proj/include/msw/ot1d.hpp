#pragma once

#include "msw/direction.hpp"
#include "msw/sample_matrix.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace msw::ot1d {

/// Nondecreasing finite values, plus the original index of each sorted entry.
class SortedSample {
 public:
  /// Stable sort by value, ties by original index.
  static SortedSample from_values(std::vector<double> values);
  /// Takes already sorted values; throws DomainError if unsorted, empty or non-finite.
  explicit SortedSample(std::vector<double> sorted_values);

  std::span<const double> values() const { return values_; }
  /// order()[i] is the original index of the i-th smallest value.
  std::span<const std::size_t> order() const { return order_; }
  std::size_t n() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  SortedSample(std::vector<double> values, std::vector<std::size_t> order);

  std::vector<double> values_;
  std::vector<std::size_t> order_;
};

struct GaussianLaw {
  double mean = 0.0;
  double variance = 1.0;
};

/// Empirical CDF of a finite sample.
struct TabulatedLaw {
  std::vector<double> values;  // sorted
};

/// One-dimensional law given by its CDF and quantile function.
class AnalyticCdf1d {
 public:
  using Descriptor = std::variant<GaussianLaw, TabulatedLaw>;

  /// Throws DomainError unless variance > 0.
  static AnalyticCdf1d gaussian(double mean, double variance);
  static AnalyticCdf1d tabulated(const SortedSample& sample);

  double cdf(double t) const;
  /// Left limit F(t-).
  double cdf_left(double t) const;
  /// Generalized inverse inf{t : F(t) >= u}, u in (0, 1).
  double quantile(double u) const;
  /// u-values in (0, 1) where the quantile function jumps.
  std::vector<double> quantile_breakpoints() const;
  /// True if the quantile diverges at 0 or 1.
  bool unbounded() const;

  const Descriptor& descriptor() const { return descriptor_; }

 private:
  explicit AnalyticCdf1d(Descriptor descriptor);
  Descriptor descriptor_;
};

/// Standard normal CDF and quantile.
double normal_cdf(double z);
double normal_quantile(double u);

/// One atom of the monotone (quantile) coupling between n and m equal-weight points.
struct CouplingPiece {
  std::size_t i;
  std::size_t j;
  double mass;
};

/// Pieces of the merged breakpoint grid {i/n} U {j/m}, in increasing u.
std::vector<CouplingPiece> quantile_coupling(std::size_t n, std::size_t m);

/// W_p^p between empirical measures on sorted values.
double w1d_empirical_pow(std::span<const double> xs, std::span<const double> ys, double p);
double w1d_empirical_pow(const SortedSample& xs, const SortedSample& ys, double p);
/// W_p. Throws DomainError when p < 1 or an input is empty.
double w1d_empirical(const SortedSample& xs, const SortedSample& ys, double p);

inline constexpr double kQuantileClip = 1e-12;
inline constexpr std::size_t kDefaultNodesPerBlock = 32;

/// Quadrature over the blocks [(i-1)/n, i/n] of the empirical quantile function, clipped to
/// [1e-12, 1 - 1e-12]. Blocks are split at `breakpoints`; with `grade_tails` the blocks
/// touching 0 or 1 are also split at 10^{-k} and 1 - 10^{-k}, k = 1..11.
struct BlockQuadrature {
  std::size_t blocks = 0;
  std::vector<std::size_t> offsets;  // nodes of block i are [offsets[i], offsets[i+1])
  std::vector<double> u;
  std::vector<double> weight;
};

BlockQuadrature make_block_quadrature(std::size_t n, std::size_t nodes_per_block,
                                      std::span<const double> breakpoints, bool grade_tails);

/// W_p(empirical xs, law) by blockwise Gauss-Legendre quadrature of the quantile coupling.
/// Throws NumericError naming u when the quantile is not finite.
double w1d_vs_cdf(const SortedSample& xs, const AnalyticCdf1d& law, double p,
                  std::size_t nodes_per_block = kDefaultNodesPerBlock);
double w1d_vs_cdf_pow(const SortedSample& xs, const AnalyticCdf1d& law, double p,
                      std::size_t nodes_per_block = kDefaultNodesPerBlock);

/// Standard normal quantiles at the block-quadrature nodes for n blocks, so that the cost
/// against any N(loc, scale^2) is evaluated without quantile calls. Immutable.
class GaussianBlockTable {
 public:
  GaussianBlockTable(std::size_t n, std::size_t nodes_per_block = kDefaultNodesPerBlock);

  /// Shared instance per (n, nodes_per_block); thread safe.
  static std::shared_ptr<const GaussianBlockTable> cached(std::size_t n,
                                                          std::size_t nodes_per_block = kDefaultNodesPerBlock);

  std::size_t n() const { return blocks_; }

  /// sum_i int_block |x_i - loc - scale z(u)|^p du for sorted x.
  double power_cost(std::span<const double> sorted_x, double loc, double scale, double p) const;
  /// Same, also filling d cost / d x_i and returning d cost / d scale.
  double power_cost_gradient(std::span<const double> sorted_x, double loc, double scale, double p,
                             std::span<double> d_dx, double& d_dscale) const;

 private:
  std::size_t blocks_;
  std::vector<std::size_t> offsets_;
  std::vector<double> z_;
  std::vector<double> weight_;
  // Per-block moments of z for the p = 2 shortcut.
  std::vector<double> m0_;
  std::vector<double> m1_;
  std::vector<double> m2_;
};

/// Sorted inner products <x_i, theta>. Throws DomainError on dimension mismatch.
SortedSample project(const SampleMatrix& samples, const Direction& theta);
/// Unsorted raw projections, for callers that sort themselves.
void project_into(const SampleMatrix& samples, const Vector& theta, std::vector<double>& out);

}  // namespace msw::ot1d
