#pragma once

#include "msw/direction.hpp"
#include "msw/measures.hpp"
#include "msw/ot1d.hpp"
#include "msw/rng.hpp"
#include "msw/sample_matrix.hpp"
#include "msw/sphere_ascent.hpp"

#include <cstddef>
#include <cstdint>

namespace msw {

/// Which one-sided ratio attains the statistic.
enum class RatioBranch {
  None,            // F == F_n at the maximizer (value 0)
  LawAbove,        // (F - F_n) / sqrt(F)
  EmpiricalAbove,  // (F_n - F) / sqrt(F_n)
};

const char* to_string(RatioBranch branch);

struct RatioStatResult {
  double value = 0.0;
  Direction arg_theta = Direction::axis(1);
  double arg_t = 0.0;
  /// True when the maximizer is the left limit at arg_t.
  bool left_limit = false;
  RatioBranch branch = RatioBranch::None;
};

/// |F(t) - F_n(t)| / sqrt(max(F(t), F_n(t))), 0 when both vanish.
double ratio_value(double law_cdf, double empirical_cdf);

/// The ratio at one (theta, t), or at t- when `left_limit`.
double ratio_at(const SampleMatrix& xs, const Direction& theta, const ot1d::AnalyticCdf1d& law, double t,
                bool left_limit);

/// Exact sup over t along theta, by evaluating both one-sided limits at every jump of F_n
/// (and of the law when it is tabulated). Throws NumericError when the law returns NaN.
RatioStatResult ratio_fixed_direction(const SampleMatrix& xs, const Direction& theta,
                                      const ot1d::AnalyticCdf1d& law);

/// Heuristic sup over theta of ratio_fixed_direction against the projected Gaussian,
/// by the multi-start ascent with central-difference derivatives. A lower bound on the sup.
/// Throws UnsupportedError for non-Gaussian specs.
RatioStatResult ratio_sup(const SampleMatrix& xs, const DistributionSpec& spec, const OptimizerOpts& opts,
                          const RngStream& rng);

/// Number of distinct labelings of the points by closed halfspaces {<x, theta> <= t}.
/// Exact; throws ScaleError unless d <= 2 and n <= 10.
std::uint64_t shatter_count(const SampleMatrix& points);

inline constexpr std::size_t kMaxShatterPoints = 10;

/// (n + 1)^{d + 1}, or (n + 1)^{2(d + 1)} for halfspaces together with their complements.
/// Throws ScaleError when the value does not fit below 2^63; use vc_bound_real there.
std::uint64_t vc_bound(std::uint64_t n, std::uint64_t d, bool two_sided = false);
double vc_bound_real(double n, double d, bool two_sided = false);

struct BoundValue {
  double raw = 0.0;
  double clipped = 0.0;
};

/// 8 exp((d + 1) log(2n + 1) - n eps^2 / 4), with the probability clip at 1.
BoundValue ratio_tail_bound(std::uint64_t n, std::uint64_t d, double eps);

}  // namespace msw
