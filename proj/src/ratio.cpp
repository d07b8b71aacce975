#include "msw/ratio.hpp"

#include "msw/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace msw {

const char* to_string(RatioBranch branch) {
  switch (branch) {
    case RatioBranch::LawAbove:
      return "law_above";
    case RatioBranch::EmpiricalAbove:
      return "empirical_above";
    case RatioBranch::None:
      break;
  }
  return "none";
}

double ratio_value(double law_cdf, double empirical_cdf) {
  if (law_cdf > empirical_cdf) return (law_cdf - empirical_cdf) / std::sqrt(law_cdf);
  if (empirical_cdf > law_cdf) return (empirical_cdf - law_cdf) / std::sqrt(empirical_cdf);
  return 0.0;
}

namespace {

RatioBranch branch_of(double law_cdf, double empirical_cdf) {
  if (law_cdf > empirical_cdf) return RatioBranch::LawAbove;
  if (empirical_cdf > law_cdf) return RatioBranch::EmpiricalAbove;
  return RatioBranch::None;
}

double checked(double v, double t) {
  if (std::isnan(v)) throw NumericError("ratio: law CDF is NaN at t = " + std::to_string(t));
  return v;
}

struct Scan {
  double value = 0.0;
  double t = 0.0;
  bool left = false;
  RatioBranch branch = RatioBranch::None;
};

// Sup over t for sorted projections. Candidate points are the sample values plus, for a
// tabulated law, its own jump points; both one-sided limits are evaluated at each.
Scan scan_sorted(std::span<const double> sorted, const ot1d::AnalyticCdf1d& law) {
  const double n = static_cast<double>(sorted.size());
  const bool continuous = std::holds_alternative<ot1d::GaussianLaw>(law.descriptor());
  std::vector<double> candidates(sorted.begin(), sorted.end());
  if (const auto* tab = std::get_if<ot1d::TabulatedLaw>(&law.descriptor())) {
    candidates.insert(candidates.end(), tab->values.begin(), tab->values.end());
    std::sort(candidates.begin(), candidates.end());
  }
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  Scan best;
  bool first = true;
  auto consider = [&](double law_cdf, double emp_cdf, double t, bool left) {
    const double r = ratio_value(law_cdf, emp_cdf);
    if (first || r > best.value) {
      first = false;
      best = Scan{r, t, left, branch_of(law_cdf, emp_cdf)};
    }
  };
  std::size_t below = 0;
  for (const double t : candidates) {
    while (below < sorted.size() && sorted[below] < t) ++below;
    std::size_t upto = below;
    while (upto < sorted.size() && sorted[upto] == t) ++upto;
    const double f = checked(law.cdf(t), t);
    const double f_left = continuous ? f : checked(law.cdf_left(t), t);
    consider(f_left, static_cast<double>(below) / n, t, true);
    consider(f, static_cast<double>(upto) / n, t, false);
  }
  return best;
}

class RatioObjective final : public ascent::FiniteDifferenceObjective {
 public:
  RatioObjective(const SampleMatrix& xs, const GaussianSpec& spec) : xs_(xs), spec_(spec) {}

  std::size_t dimension() const override { return xs_.d(); }

  double value(const Vector& theta) override { return scan(theta).value; }

  Scan scan(const Vector& theta) {
    ot1d::project_into(xs_, theta, buffer_);
    std::sort(buffer_.begin(), buffer_.end());
    return scan_sorted(buffer_, law_for(theta));
  }

  ot1d::AnalyticCdf1d law_for(const Vector& theta) const {
    const double variance = theta.dot(spec_.covariance * theta);
    // A zero-variance projection is a point mass; the tiny floor keeps the CDF a step at the mean.
    return ot1d::AnalyticCdf1d::gaussian(spec_.mean.dot(theta), std::max(variance, 1e-300));
  }

 private:
  const SampleMatrix& xs_;
  const GaussianSpec& spec_;
  std::vector<double> buffer_;
};

Matrix centered_scatter(const SampleMatrix& s) {
  const Vector mu = s.mean();
  const Matrix centered = s.data().rowwise() - mu.transpose();
  return centered.transpose() * centered / static_cast<double>(s.n());
}

RatioStatResult to_result(const Scan& scan, const Direction& theta) {
  RatioStatResult result;
  result.value = scan.value;
  result.arg_theta = theta;
  result.arg_t = scan.t;
  result.left_limit = scan.left;
  result.branch = scan.branch;
  return result;
}

}  // namespace

double ratio_at(const SampleMatrix& xs, const Direction& theta, const ot1d::AnalyticCdf1d& law, double t,
                bool left_limit) {
  const auto sorted = ot1d::project(xs, theta);
  const auto values = sorted.values();
  const auto count = left_limit ? std::lower_bound(values.begin(), values.end(), t) - values.begin()
                                : std::upper_bound(values.begin(), values.end(), t) - values.begin();
  const double emp = static_cast<double>(count) / static_cast<double>(values.size());
  const double f = checked(left_limit ? law.cdf_left(t) : law.cdf(t), t);
  return ratio_value(f, emp);
}

RatioStatResult ratio_fixed_direction(const SampleMatrix& xs, const Direction& theta,
                                      const ot1d::AnalyticCdf1d& law) {
  const auto sorted = ot1d::project(xs, theta);
  return to_result(scan_sorted(sorted.values(), law), theta);
}

RatioStatResult ratio_sup(const SampleMatrix& xs, const DistributionSpec& spec, const OptimizerOpts& opts,
                          const RngStream& rng) {
  opts.validate();
  const auto* gaussian = std::get_if<GaussianSpec>(&spec);
  if (gaussian == nullptr) throw UnsupportedError("ratio_sup: only Gaussian specs have closed-form projections");
  validate(spec);
  if (static_cast<std::size_t>(gaussian->mean.size()) != xs.d()) throw DomainError("ratio_sup: dimension mismatch");
  const std::size_t d = xs.d();
  RatioObjective objective(xs, *gaussian);
  if (d == 1) {
    const Vector plus = Vector::Ones(1);
    const Vector minus = -plus;
    const Scan a = objective.scan(plus);
    const Scan b = objective.scan(minus);
    return b.value > a.value ? to_result(b, Direction(minus)) : to_result(a, Direction(plus));
  }
  std::vector<Vector> starts = ascent::random_starts(d, opts.restarts, rng);
  if (opts.include_seeded_starts) {
    const Matrix pooled = 0.5 * (centered_scatter(xs) + gaussian->covariance);
    for (auto& v : ascent::principal_directions(pooled, 3)) starts.push_back(std::move(v));
    const Vector shift = xs.mean() - gaussian->mean;
    if (shift.norm() > 0.0) starts.push_back(shift.normalized());
    if (d <= 3) {
      // The ratio is not even in theta, so the half-circle grid is doubled.
      const std::size_t res = ascent::seed_grid_resolution(d) / 2;
      Vector best_theta;
      double best = -1.0;
      for (const auto& g : ascent::grid_directions(d, res)) {
        for (const double sign : {1.0, -1.0}) {
          if (d == 3 && sign < 0.0) continue;
          const Vector theta = sign * g;
          const double v = objective.value(theta);
          if (v > best) {
            best = v;
            best_theta = theta;
          }
        }
      }
      starts.push_back(std::move(best_theta));
    }
  }
  const auto run = ascent::multi_start(objective, starts, opts);
  const Direction theta = Direction::normalized(run.theta);
  return to_result(objective.scan(theta.coords()), theta);
}

std::uint64_t shatter_count(const SampleMatrix& points) {
  const std::size_t n = points.n();
  const std::size_t d = points.d();
  if (d > 2 || n > kMaxShatterPoints) throw ScaleError("shatter_count: exact enumeration needs d <= 2 and n <= 10");
  std::set<std::uint32_t> labelings;
  const std::uint32_t all = (std::uint32_t{1} << n) - 1;
  labelings.insert(0);
  labelings.insert(all);

  // Every prefix of the points ordered by (primary, secondary) keys, cut between distinct key levels.
  auto add_prefixes = [&](const std::vector<std::pair<double, double>>& keys) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::uint32_t mask = 0;
    for (std::size_t k = 0; k < n; ++k) {
      mask |= std::uint32_t{1} << order[k];
      if (k + 1 == n || keys[order[k + 1]] != keys[order[k]]) labelings.insert(mask);
    }
  };

  std::vector<std::pair<double, double>> keys(n);
  if (d == 1) {
    for (const double sign : {1.0, -1.0}) {
      for (std::size_t k = 0; k < n; ++k) keys[k] = {sign * points.row(k)(0), 0.0};
      add_prefixes(keys);
    }
    return labelings.size();
  }
  // Directions normal to x_j - x_i, rotated infinitesimally either way.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ex = points.row(j)(0) - points.row(i)(0);
      const double ey = points.row(j)(1) - points.row(i)(1);
      if (ex == 0.0 && ey == 0.0) continue;
      for (const double s1 : {1.0, -1.0}) {
        for (const double s2 : {1.0, -1.0}) {
          for (std::size_t k = 0; k < n; ++k) {
            const double dx = points.row(k)(0) - points.row(i)(0);
            const double dy = points.row(k)(1) - points.row(i)(1);
            keys[k] = {s1 * (ex * dy - ey * dx), s2 * (ex * dx + ey * dy)};
          }
          add_prefixes(keys);
        }
      }
    }
  }
  // All points coincide: only the empty and full labelings (already present).
  return labelings.size();
}

std::uint64_t vc_bound(std::uint64_t n, std::uint64_t d, bool two_sided) {
  if (n < 1 || d < 1) throw DomainError("vc_bound: n and d must be >= 1");
  const std::uint64_t exponent = (d + 1) * (two_sided ? 2 : 1);
  const std::uint64_t base = n + 1;
  constexpr std::uint64_t limit = std::uint64_t{1} << 63;
  std::uint64_t value = 1;
  for (std::uint64_t k = 0; k < exponent; ++k) {
    if (value > (limit - 1) / base) throw ScaleError("vc_bound: value exceeds 2^63; use vc_bound_real");
    value *= base;
  }
  return value;
}

double vc_bound_real(double n, double d, bool two_sided) {
  if (!(n >= 1.0) || !(d >= 1.0)) throw DomainError("vc_bound_real: n and d must be >= 1");
  return std::pow(n + 1.0, (d + 1.0) * (two_sided ? 2.0 : 1.0));
}

BoundValue ratio_tail_bound(std::uint64_t n, std::uint64_t d, double eps) {
  if (!(eps >= 0.0)) throw DomainError("ratio_tail_bound: eps must be >= 0");
  const double nn = static_cast<double>(n);
  const double raw = 8.0 * std::exp((static_cast<double>(d) + 1.0) * std::log(2.0 * nn + 1.0) - nn * eps * eps / 4.0);
  return BoundValue{raw, std::min(1.0, raw)};
}

}  // namespace msw
