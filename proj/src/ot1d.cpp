#include "msw/ot1d.hpp"

#include "msw/error.hpp"
#include "msw/quadrature.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

namespace msw::ot1d {

namespace {

inline double pow_abs(double x, double p) {
  if (p == 1.0) return std::abs(x);
  if (p == 2.0) return x * x;
  return std::pow(std::abs(x), p);
}

inline double root(double value, double p) {
  if (p == 1.0) return value;
  if (p == 2.0) return std::sqrt(value);
  return std::pow(value, 1.0 / p);
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// d/dx |x|^p, with sign(0) = 0 at p = 1.
inline double dpow_abs(double x, double p) {
  if (p == 1.0) return sign(x);
  if (p == 2.0) return 2.0 * x;
  return p * sign(x) * std::pow(std::abs(x), p - 1.0);
}

void check_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("order p must be a finite real >= 1");
}

}  // namespace

SortedSample::SortedSample(std::vector<double> values, std::vector<std::size_t> order)
    : values_(std::move(values)), order_(std::move(order)) {}

SortedSample SortedSample::from_values(std::vector<double> values) {
  if (values.empty()) throw DomainError("sorted sample: empty input");
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("sorted sample: non-finite value");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  std::vector<double> sorted(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = values[order[i]];
  return SortedSample(std::move(sorted), std::move(order));
}

SortedSample::SortedSample(std::vector<double> sorted_values) : values_(std::move(sorted_values)) {
  if (values_.empty()) throw DomainError("sorted sample: empty input");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw DomainError("sorted sample: non-finite value");
    if (i > 0 && values_[i - 1] > values_[i]) throw DomainError("sorted sample: values are not nondecreasing");
  }
  order_.resize(values_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream msg;
    msg << "normal quantile undefined at u = " << u;
    throw NumericError(msg.str());
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

AnalyticCdf1d::AnalyticCdf1d(Descriptor descriptor) : descriptor_(std::move(descriptor)) {}

AnalyticCdf1d AnalyticCdf1d::gaussian(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
    throw DomainError("gaussian law: variance must be positive and finite");
  }
  return AnalyticCdf1d(GaussianLaw{mean, variance});
}

AnalyticCdf1d AnalyticCdf1d::tabulated(const SortedSample& sample) {
  return AnalyticCdf1d(TabulatedLaw{std::vector<double>(sample.values().begin(), sample.values().end())});
}

double AnalyticCdf1d::cdf(double t) const {
  if (const auto* g = std::get_if<GaussianLaw>(&descriptor_)) return normal_cdf((t - g->mean) / std::sqrt(g->variance));
  const auto& v = std::get<TabulatedLaw>(descriptor_).values;
  return static_cast<double>(std::upper_bound(v.begin(), v.end(), t) - v.begin()) / static_cast<double>(v.size());
}

double AnalyticCdf1d::cdf_left(double t) const {
  if (std::holds_alternative<GaussianLaw>(descriptor_)) return cdf(t);
  const auto& v = std::get<TabulatedLaw>(descriptor_).values;
  return static_cast<double>(std::lower_bound(v.begin(), v.end(), t) - v.begin()) / static_cast<double>(v.size());
}

double AnalyticCdf1d::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream msg;
    msg << "quantile undefined at u = " << u;
    throw NumericError(msg.str());
  }
  if (const auto* g = std::get_if<GaussianLaw>(&descriptor_)) return g->mean + std::sqrt(g->variance) * normal_quantile(u);
  const auto& v = std::get<TabulatedLaw>(descriptor_).values;
  const auto m = static_cast<double>(v.size());
  auto k = static_cast<std::size_t>(std::ceil(u * m));
  k = std::clamp<std::size_t>(k, 1, v.size());
  return v[k - 1];
}

std::vector<double> AnalyticCdf1d::quantile_breakpoints() const {
  std::vector<double> out;
  if (const auto* t = std::get_if<TabulatedLaw>(&descriptor_)) {
    const std::size_t m = t->values.size();
    for (std::size_t j = 1; j < m; ++j) out.push_back(static_cast<double>(j) / static_cast<double>(m));
  }
  return out;
}

bool AnalyticCdf1d::unbounded() const { return std::holds_alternative<GaussianLaw>(descriptor_); }

std::vector<CouplingPiece> quantile_coupling(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw DomainError("quantile coupling: empty input");
  std::vector<CouplingPiece> pieces;
  if (n == m) {
    pieces.reserve(n);
    const double mass = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) pieces.push_back({i, i, mass});
    return pieces;
  }
  pieces.reserve(n + m);
  // Breakpoints in integer units of 1/(n m): x-breaks at (i+1) m, y-breaks at (j+1) n.
  const double unit = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  std::uint64_t pos = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < m) {
    const std::uint64_t x_end = static_cast<std::uint64_t>(i + 1) * m;
    const std::uint64_t y_end = static_cast<std::uint64_t>(j + 1) * n;
    const std::uint64_t end = std::min(x_end, y_end);
    pieces.push_back({i, j, static_cast<double>(end - pos) * unit});
    pos = end;
    if (x_end == end) ++i;
    if (y_end == end) ++j;
  }
  return pieces;
}

double w1d_empirical_pow(std::span<const double> xs, std::span<const double> ys, double p) {
  check_order(p);
  if (xs.empty() || ys.empty()) throw DomainError("w1d: empty input");
  double sum = 0.0;
  if (xs.size() == ys.size()) {
    for (std::size_t i = 0; i < xs.size(); ++i) sum += pow_abs(xs[i] - ys[i], p);
    return sum / static_cast<double>(xs.size());
  }
  for (const auto& piece : quantile_coupling(xs.size(), ys.size())) {
    sum += piece.mass * pow_abs(xs[piece.i] - ys[piece.j], p);
  }
  return sum;
}

double w1d_empirical_pow(const SortedSample& xs, const SortedSample& ys, double p) {
  return w1d_empirical_pow(xs.values(), ys.values(), p);
}

double w1d_empirical(const SortedSample& xs, const SortedSample& ys, double p) {
  return root(w1d_empirical_pow(xs, ys, p), p);
}

BlockQuadrature make_block_quadrature(std::size_t n, std::size_t nodes_per_block,
                                      std::span<const double> breakpoints, bool grade_tails) {
  if (n == 0) throw DomainError("block quadrature: n must be positive");
  if (nodes_per_block == 0) throw DomainError("block quadrature: nodes_per_block must be positive");
  const auto& rule = quadrature::gauss_legendre_cached(nodes_per_block);
  std::vector<double> grading;
  if (grade_tails) {
    for (int k = 1; k <= 11; ++k) {
      grading.push_back(std::pow(10.0, -k));
      grading.push_back(1.0 - std::pow(10.0, -k));
    }
    std::sort(grading.begin(), grading.end());
  }
  BlockQuadrature out;
  out.blocks = n;
  out.offsets.reserve(n + 1);
  out.offsets.push_back(0);
  const auto nd = static_cast<double>(n);
  std::vector<double> cuts;
  std::size_t bp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(static_cast<double>(i) / nd, kQuantileClip);
    const double hi = std::min(static_cast<double>(i + 1) / nd, 1.0 - kQuantileClip);
    cuts.clear();
    cuts.push_back(lo);
    while (bp < breakpoints.size() && breakpoints[bp] <= lo) ++bp;
    std::size_t bq = bp;
    while (bq < breakpoints.size() && breakpoints[bq] < hi) cuts.push_back(breakpoints[bq++]);
    if (grade_tails && (i == 0 || i + 1 == n)) {
      for (double g : grading) {
        if (g > lo && g < hi) cuts.push_back(g);
      }
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double half = 0.5 * (cuts[c + 1] - cuts[c]);
      const double mid = 0.5 * (cuts[c + 1] + cuts[c]);
      if (!(half > 0.0)) continue;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        out.u.push_back(mid + half * rule.nodes[k]);
        out.weight.push_back(half * rule.weights[k]);
      }
    }
    out.offsets.push_back(out.u.size());
  }
  return out;
}

double w1d_vs_cdf_pow(const SortedSample& xs, const AnalyticCdf1d& law, double p, std::size_t nodes_per_block) {
  check_order(p);
  auto breaks = law.quantile_breakpoints();
  // |x_i - q(u)|^p has a kink where q crosses x_i, at u = F(x_i), unless p is an even integer.
  if (!(std::fmod(p, 2.0) == 0.0)) {
    for (std::size_t i = 0; i < xs.n(); ++i) {
      const double u = law.cdf(xs[i]);
      if (u > 0.0 && u < 1.0) breaks.push_back(u);
    }
    std::sort(breaks.begin(), breaks.end());
  }
  const auto quad = make_block_quadrature(xs.n(), nodes_per_block, breaks, law.unbounded());
  double sum = 0.0;
  for (std::size_t i = 0; i < quad.blocks; ++i) {
    const double x = xs[i];
    for (std::size_t k = quad.offsets[i]; k < quad.offsets[i + 1]; ++k) {
      const double q = law.quantile(quad.u[k]);
      if (!std::isfinite(q)) {
        std::ostringstream msg;
        msg << "w1d_vs_cdf: quantile not finite at u = " << quad.u[k];
        throw NumericError(msg.str());
      }
      sum += quad.weight[k] * pow_abs(x - q, p);
    }
  }
  return sum;
}

double w1d_vs_cdf(const SortedSample& xs, const AnalyticCdf1d& law, double p, std::size_t nodes_per_block) {
  return root(w1d_vs_cdf_pow(xs, law, p, nodes_per_block), p);
}

GaussianBlockTable::GaussianBlockTable(std::size_t n, std::size_t nodes_per_block) : blocks_(n) {
  const auto quad = make_block_quadrature(n, nodes_per_block, {}, true);
  offsets_ = quad.offsets;
  weight_ = quad.weight;
  z_.resize(quad.u.size());
  for (std::size_t k = 0; k < quad.u.size(); ++k) z_[k] = normal_quantile(quad.u[k]);
  m0_.assign(n, 0.0);
  m1_.assign(n, 0.0);
  m2_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      m0_[i] += weight_[k];
      m1_[i] += weight_[k] * z_[k];
      m2_[i] += weight_[k] * z_[k] * z_[k];
    }
  }
}

std::shared_ptr<const GaussianBlockTable> GaussianBlockTable::cached(std::size_t n, std::size_t nodes_per_block) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const GaussianBlockTable>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({n, nodes_per_block});
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const GaussianBlockTable>(n, nodes_per_block);
  std::lock_guard lock(mutex);
  return cache.try_emplace({n, nodes_per_block}, std::move(table)).first->second;
}

double GaussianBlockTable::power_cost(std::span<const double> x, double loc, double scale, double p) const {
  if (x.size() != blocks_) throw DomainError("gaussian block table: sample size mismatch");
  double sum = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < blocks_; ++i) {
      const double a = x[i] - loc;
      sum += a * a * m0_[i] - 2.0 * a * scale * m1_[i] + scale * scale * m2_[i];
    }
    return std::max(sum, 0.0);
  }
  for (std::size_t i = 0; i < blocks_; ++i) {
    const double a = x[i] - loc;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) sum += weight_[k] * pow_abs(a - scale * z_[k], p);
  }
  return sum;
}

double GaussianBlockTable::power_cost_gradient(std::span<const double> x, double loc, double scale, double p,
                                               std::span<double> d_dx, double& d_dscale) const {
  if (x.size() != blocks_ || d_dx.size() != blocks_) throw DomainError("gaussian block table: sample size mismatch");
  double sum = 0.0;
  d_dscale = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < blocks_; ++i) {
      const double a = x[i] - loc;
      sum += a * a * m0_[i] - 2.0 * a * scale * m1_[i] + scale * scale * m2_[i];
      d_dx[i] = 2.0 * (a * m0_[i] - scale * m1_[i]);
      d_dscale += 2.0 * (scale * m2_[i] - a * m1_[i]);
    }
    return std::max(sum, 0.0);
  }
  for (std::size_t i = 0; i < blocks_; ++i) {
    const double a = x[i] - loc;
    double dx = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const double delta = a - scale * z_[k];
      sum += weight_[k] * pow_abs(delta, p);
      const double g = weight_[k] * dpow_abs(delta, p);
      dx += g;
      d_dscale -= g * z_[k];
    }
    d_dx[i] = dx;
  }
  return sum;
}

void project_into(const SampleMatrix& samples, const Vector& theta, std::vector<double>& out) {
  if (static_cast<std::size_t>(theta.size()) != samples.d()) throw DomainError("project: dimension mismatch");
  out.resize(samples.n());
  Eigen::Map<Vector> target(out.data(), static_cast<Eigen::Index>(out.size()));
  target.noalias() = samples.data() * theta;
}

SortedSample project(const SampleMatrix& samples, const Direction& theta) {
  std::vector<double> values;
  project_into(samples, theta.coords(), values);
  return SortedSample::from_values(std::move(values));
}

}  // namespace msw::ot1d
