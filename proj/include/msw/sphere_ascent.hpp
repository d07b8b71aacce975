#pragma once

#include "msw/rng.hpp"
#include "msw/sample_matrix.hpp"

#include <cstddef>
#include <vector>

namespace msw {

/// Settings of the multi-start projected ascent on the unit sphere.
struct OptimizerOpts {
  std::size_t restarts = 30;
  std::size_t max_iters = 500;
  double step0 = 0.1;
  /// Trial step at iteration k is step0 * step_decay^k, or step0 / sqrt(k + 1) when step_decay == 1.
  double step_decay = 1.0;
  double tol = 1e-9;
  bool include_seeded_starts = true;

  /// Throws DomainError when a field is out of range.
  void validate() const;
};

namespace ascent {

/// A function on the unit sphere, evaluated at unit vectors, with an ambient (sub)gradient.
/// Implementations may keep scratch state, so one instance is used by one thread.
class SphereObjective {
 public:
  virtual ~SphereObjective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(const Vector& theta) = 0;
  virtual double value_gradient(const Vector& theta, Vector& gradient) = 0;
};

/// Central differences of value(theta / |theta|) in ambient coordinates.
class FiniteDifferenceObjective : public SphereObjective {
 public:
  explicit FiniteDifferenceObjective(double step = 1e-7) : step_(step) {}
  double value_gradient(const Vector& theta, Vector& gradient) override;

 private:
  double step_;
};

struct AscentResult {
  Vector theta;
  double value = 0.0;
  std::size_t iterations = 0;
};

/// Monotone projected (sub)gradient ascent from one start. Each iteration moves along the
/// normalized tangent gradient by the scheduled step, halving it until the value improves,
/// then retracts to the sphere; stops on improvement < tol, no improving step, or max_iters.
AscentResult ascend(SphereObjective& objective, const Vector& start, const OptimizerOpts& opts);

struct MultiStartResult {
  Vector theta;
  double value = 0.0;
  std::size_t starts = 0;
  std::size_t iterations = 0;
  std::size_t best_start = 0;
};

/// Ascent from every start; the best value wins, ties go to the lowest start index.
MultiStartResult multi_start(SphereObjective& objective, const std::vector<Vector>& starts,
                             const OptimizerOpts& opts);

/// Uniform random directions; start k is drawn from rng.derive(k).
std::vector<Vector> random_starts(std::size_t d, std::size_t count, const RngStream& rng);

/// Top eigenvectors (largest eigenvalue first) of a symmetric matrix, at most `count`.
std::vector<Vector> principal_directions(const Matrix& symmetric, std::size_t count);

/// d = 2: `resolution` angles in [0, pi) (antipodes are redundant for even objectives).
/// d = 3: Fibonacci lattice of `resolution` points on the sphere.
/// Throws UnsupportedError for other d.
std::vector<Vector> grid_directions(std::size_t d, std::size_t resolution);

/// Angle within which every unit vector has a grid direction (up to antipodes);
/// pi / resolution for d = 2, sqrt(4 pi / resolution) for the Fibonacci lattice.
double grid_spacing(std::size_t d, std::size_t resolution);

/// Grid resolution used for the seed direction when d <= 3.
std::size_t seed_grid_resolution(std::size_t d);

}  // namespace ascent
}  // namespace msw
