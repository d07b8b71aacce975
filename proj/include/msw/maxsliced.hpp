#pragma once

#include "msw/direction.hpp"
#include "msw/measures.hpp"
#include "msw/rng.hpp"
#include "msw/sample_matrix.hpp"
#include "msw/sphere_ascent.hpp"

#include <cstddef>
#include <optional>

namespace msw {

struct MswResult {
  /// Achieved W_p at argmax, recomputed from scratch; a lower bound on the supremum.
  double value = 0.0;
  Direction argmax = Direction::axis(1);
  std::size_t restarts_used = 0;
  std::size_t iterations = 0;
  /// value minus the grid-seed value when a grid seed was used (d <= 3).
  std::optional<double> oracle_gap;
  /// Grid oracle only: bound on (supremum - value).
  std::optional<double> error_bound;
};

/// max over theta of W_p between the projections of two empirical measures.
/// Throws DomainError on dimension mismatch or p < 1.
MswResult msw_empirical(const SampleMatrix& xs, const SampleMatrix& ys, double p,
                        const OptimizerOpts& opts, const RngStream& rng);

/// max over theta of W_p between the projected sample and the projected Gaussian
/// N(<mean, theta>, theta' Sigma theta). Throws UnsupportedError for non-Gaussian specs.
MswResult msw_vs_analytic(const SampleMatrix& xs, const DistributionSpec& spec, double p,
                          const OptimizerOpts& opts, const RngStream& rng);

/// Exhaustive search over a direction grid (d = 2 or 3), with the Lipschitz error bound
/// (max |x_i| + max |y_j|) * grid spacing. Throws UnsupportedError for other d.
MswResult msw_grid_oracle(const SampleMatrix& xs, const SampleMatrix& ys, double p,
                          std::size_t resolution);

/// Full W_p between equal-size empirical measures by exact assignment.
/// Throws DomainError for unequal sizes and ScaleError for n > 64.
double wasserstein_full(const SampleMatrix& xs, const SampleMatrix& ys, double p);

inline constexpr std::size_t kMaxAssignmentSize = 64;

}  // namespace msw
