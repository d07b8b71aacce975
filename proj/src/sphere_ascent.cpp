#include "msw/sphere_ascent.hpp"

#include "msw/error.hpp"

#include <cmath>
#include <numbers>

namespace msw {

void OptimizerOpts::validate() const {
  if (restarts < 1) throw DomainError("optimizer: restarts must be >= 1");
  if (max_iters < 1) throw DomainError("optimizer: max_iters must be >= 1");
  if (!(step0 > 0.0) || !std::isfinite(step0)) throw DomainError("optimizer: step0 must be positive");
  if (!(step_decay > 0.0 && step_decay <= 1.0)) throw DomainError("optimizer: step_decay must lie in (0, 1]");
  if (!(tol > 0.0)) throw DomainError("optimizer: tol must be positive");
}

namespace ascent {

namespace {

constexpr int kMaxBacktracks = 40;

}  // namespace

double FiniteDifferenceObjective::value_gradient(const Vector& theta, Vector& gradient) {
  const double centre = value(theta);
  gradient.resize(theta.size());
  Vector probe = theta;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    probe[k] = theta[k] + step_;
    const double up = value(probe / probe.norm());
    probe[k] = theta[k] - step_;
    const double down = value(probe / probe.norm());
    probe[k] = theta[k];
    gradient[k] = (up - down) / (2.0 * step_);
  }
  return centre;
}

AscentResult ascend(SphereObjective& objective, const Vector& start, const OptimizerOpts& opts) {
  AscentResult result;
  result.theta = start.normalized();
  Vector gradient;
  result.value = objective.value_gradient(result.theta, gradient);
  Vector candidate_gradient;
  for (std::size_t k = 0; k < opts.max_iters; ++k) {
    ++result.iterations;
    const Vector tangent = gradient - gradient.dot(result.theta) * result.theta;
    const double tangent_norm = tangent.norm();
    if (!(tangent_norm > 1e-15 * std::max(1.0, std::abs(result.value)))) break;
    double step = opts.step_decay == 1.0 ? opts.step0 / std::sqrt(static_cast<double>(k) + 1.0)
                                         : opts.step0 * std::pow(opts.step_decay, static_cast<double>(k));
    bool moved = false;
    Vector candidate;
    double candidate_value = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      candidate = (result.theta + (step / tangent_norm) * tangent).normalized();
      candidate_value = objective.value_gradient(candidate, candidate_gradient);
      if (candidate_value > result.value) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    const double improvement = candidate_value - result.value;
    result.theta = candidate;
    result.value = candidate_value;
    gradient.swap(candidate_gradient);
    if (improvement < opts.tol) break;
  }
  return result;
}

MultiStartResult multi_start(SphereObjective& objective, const std::vector<Vector>& starts,
                             const OptimizerOpts& opts) {
  if (starts.empty()) throw DomainError("multi_start: no starting directions");
  MultiStartResult best;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto run = ascend(objective, starts[s], opts);
    best.iterations += run.iterations;
    if (s == 0 || run.value > best.value) {
      best.value = run.value;
      best.theta = std::move(run.theta);
      best.best_start = s;
    }
  }
  best.starts = starts.size();
  return best;
}

std::vector<Vector> random_starts(std::size_t d, std::size_t count, const RngStream& rng) {
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    RngStream stream = rng.derive(k);
    Vector v(static_cast<Eigen::Index>(d));
    do {
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = stream.normal();
    } while (!(v.norm() > 1e-300));
    out.push_back(v.normalized());
  }
  return out;
}

std::vector<Vector> principal_directions(const Matrix& symmetric, std::size_t count) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) throw NumericError("principal_directions: eigen solver failed");
  std::vector<Vector> out;
  const auto d = symmetric.rows();
  for (Eigen::Index k = d - 1; k >= 0 && out.size() < count; --k) out.push_back(solver.eigenvectors().col(k));
  return out;
}

std::vector<Vector> grid_directions(std::size_t d, std::size_t resolution) {
  if (resolution == 0) throw DomainError("grid: resolution must be positive");
  std::vector<Vector> out;
  out.reserve(resolution);
  if (d == 2) {
    for (std::size_t k = 0; k < resolution; ++k) {
      const double angle = std::numbers::pi * static_cast<double>(k) / static_cast<double>(resolution);
      Vector v(2);
      v << std::cos(angle), std::sin(angle);
      out.push_back(std::move(v));
    }
    return out;
  }
  if (d == 3) {
    const double golden = std::numbers::pi * (1.0 + std::sqrt(5.0));
    for (std::size_t k = 0; k < resolution; ++k) {
      const double offset = static_cast<double>(k) + 0.5;
      const double z = 1.0 - 2.0 * offset / static_cast<double>(resolution);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * offset;
      Vector v(3);
      v << r * std::cos(phi), r * std::sin(phi), z;
      out.push_back(v.normalized());
    }
    return out;
  }
  throw UnsupportedError("grid: only d = 2 and d = 3 are supported");
}

double grid_spacing(std::size_t d, std::size_t resolution) {
  if (d == 2) return std::numbers::pi / static_cast<double>(resolution);
  if (d == 3) return std::sqrt(4.0 * std::numbers::pi / static_cast<double>(resolution));
  throw UnsupportedError("grid: only d = 2 and d = 3 are supported");
}

std::size_t seed_grid_resolution(std::size_t d) { return d == 2 ? 720 : 2048; }

}  // namespace ascent
}  // namespace msw
