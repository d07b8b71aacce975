#include "msw/maxsliced.hpp"

#include "msw/assignment.hpp"
#include "msw/error.hpp"
#include "msw/ot1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace msw {

namespace {

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be a finite real >= 1");
}

// |delta|^p and its derivative sign(delta) p |delta|^{p-1}, with sign(0) = 0.
inline double power_abs(double delta, double p) {
  const double a = std::abs(delta);
  return p == 2.0 ? a * a : (p == 1.0 ? a : std::pow(a, p));
}

inline double power_abs_derivative(double delta, double p) {
  if (delta == 0.0) return 0.0;
  const double s = delta > 0.0 ? 1.0 : -1.0;
  if (p == 1.0) return s;
  if (p == 2.0) return 2.0 * delta;
  return s * p * std::pow(std::abs(delta), p - 1.0);
}

void sort_order(const std::vector<double>& values, std::vector<std::size_t>& order) {
  order.resize(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
}

// W_p^p between the projections of two empirical measures, with the fixed-matching gradient.
class EmpiricalObjective final : public ascent::SphereObjective {
 public:
  EmpiricalObjective(const SampleMatrix& xs, const SampleMatrix& ys, double p)
      : xs_(xs), ys_(ys), p_(p), pieces_(ot1d::quantile_coupling(xs.n(), ys.n())) {}

  std::size_t dimension() const override { return xs_.d(); }

  double value(const Vector& theta) override {
    project(theta);
    double total = 0.0;
    for (const auto& piece : pieces_) {
      total += piece.mass * power_abs(px_[ox_[piece.i]] - py_[oy_[piece.j]], p_);
    }
    return total;
  }

  double value_gradient(const Vector& theta, Vector& gradient) override {
    project(theta);
    cx_.setZero(static_cast<Eigen::Index>(xs_.n()));
    cy_.setZero(static_cast<Eigen::Index>(ys_.n()));
    double total = 0.0;
    for (const auto& piece : pieces_) {
      const std::size_t a = ox_[piece.i];
      const std::size_t b = oy_[piece.j];
      const double delta = px_[a] - py_[b];
      total += piece.mass * power_abs(delta, p_);
      const double g = piece.mass * power_abs_derivative(delta, p_);
      cx_[static_cast<Eigen::Index>(a)] += g;
      cy_[static_cast<Eigen::Index>(b)] -= g;
    }
    gradient = xs_.data().transpose() * cx_ + ys_.data().transpose() * cy_;
    return total;
  }

 private:
  void project(const Vector& theta) {
    ot1d::project_into(xs_, theta, px_);
    ot1d::project_into(ys_, theta, py_);
    sort_order(px_, ox_);
    sort_order(py_, oy_);
  }

  const SampleMatrix& xs_;
  const SampleMatrix& ys_;
  double p_;
  std::vector<ot1d::CouplingPiece> pieces_;
  std::vector<double> px_, py_;
  std::vector<std::size_t> ox_, oy_;
  Vector cx_, cy_;
};

// W_p^p between the projected sample and the projected Gaussian.
class AnalyticObjective final : public ascent::SphereObjective {
 public:
  AnalyticObjective(const SampleMatrix& xs, const GaussianSpec& spec, double p)
      : xs_(xs), spec_(spec), p_(p), table_(ot1d::GaussianBlockTable::cached(xs.n())) {}

  std::size_t dimension() const override { return xs_.d(); }

  double value(const Vector& theta) override {
    prepare(theta);
    return table_->power_cost(sorted_, loc_, scale_, p_);
  }

  double value_gradient(const Vector& theta, Vector& gradient) override {
    prepare(theta);
    d_dx_.resize(sorted_.size());
    double d_dscale = 0.0;
    const double total = table_->power_cost_gradient(sorted_, loc_, scale_, p_, d_dx_, d_dscale);
    cx_.setZero(static_cast<Eigen::Index>(xs_.n()));
    double sum_dx = 0.0;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      cx_[static_cast<Eigen::Index>(order_[i])] = d_dx_[i];
      sum_dx += d_dx_[i];
    }
    gradient = xs_.data().transpose() * cx_ - sum_dx * spec_.mean;
    if (scale_ > 0.0) gradient += (d_dscale / scale_) * (spec_.covariance * theta);
    return total;
  }

 private:
  void prepare(const Vector& theta) {
    ot1d::project_into(xs_, theta, raw_);
    sort_order(raw_, order_);
    sorted_.resize(raw_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) sorted_[i] = raw_[order_[i]];
    loc_ = spec_.mean.dot(theta);
    scale_ = std::sqrt(std::max(0.0, theta.dot(spec_.covariance * theta)));
  }

  const SampleMatrix& xs_;
  const GaussianSpec& spec_;
  double p_;
  std::shared_ptr<const ot1d::GaussianBlockTable> table_;
  std::vector<double> raw_, sorted_, d_dx_;
  std::vector<std::size_t> order_;
  Vector cx_;
  double loc_ = 0.0;
  double scale_ = 1.0;
};

double projected_w(const SampleMatrix& xs, const SampleMatrix& ys, const Vector& theta, double p) {
  const Direction dir(theta);
  return ot1d::w1d_empirical(ot1d::project(xs, dir), ot1d::project(ys, dir), p);
}

double projected_w_analytic(const SampleMatrix& xs, const GaussianSpec& spec, const Vector& theta, double p) {
  const Direction dir(theta);
  const double variance = theta.dot(spec.covariance * theta);
  const auto sorted = ot1d::project(xs, dir);
  if (!(variance > 0.0)) {
    // Degenerate projection: the law is a point mass at the projected mean.
    std::vector<double> atom{spec.mean.dot(theta)};
    return ot1d::w1d_empirical(sorted, ot1d::SortedSample(std::move(atom)), p);
  }
  return ot1d::w1d_vs_cdf(sorted, ot1d::AnalyticCdf1d::gaussian(spec.mean.dot(theta), variance), p);
}

Matrix centered_scatter(const SampleMatrix& s) {
  const Vector mu = s.mean();
  const Matrix centered = s.data().rowwise() - mu.transpose();
  return centered.transpose() * centered;
}

struct GridBest {
  Vector theta;
  double value = -1.0;
};

template <typename Eval>
GridBest grid_search(std::size_t d, std::size_t resolution, Eval&& eval) {
  GridBest best;
  for (const auto& theta : ascent::grid_directions(d, resolution)) {
    const double v = eval(theta);
    if (v > best.value) {
      best.value = v;
      best.theta = theta;
    }
  }
  return best;
}

struct StartSet {
  std::vector<Vector> starts;
  std::optional<double> grid_value;  // objective (power) value of the grid seed
};

MswResult finish(const ascent::MultiStartResult& run, double value, const StartSet& set, double p,
                 std::size_t restarts) {
  MswResult result;
  result.value = value;
  result.argmax = Direction::normalized(run.theta);
  result.restarts_used = restarts;
  result.iterations = run.iterations;
  if (set.grid_value) result.oracle_gap = value - std::pow(std::max(0.0, *set.grid_value), 1.0 / p);
  return result;
}

}  // namespace

MswResult msw_empirical(const SampleMatrix& xs, const SampleMatrix& ys, double p,
                        const OptimizerOpts& opts, const RngStream& rng) {
  check_p(p);
  opts.validate();
  if (xs.d() != ys.d()) throw DomainError("msw_empirical: dimension mismatch");
  const std::size_t d = xs.d();
  if (d == 1) {
    MswResult result;
    result.value = projected_w(xs, ys, Vector::Ones(1), p);
    return result;
  }
  EmpiricalObjective objective(xs, ys, p);
  StartSet set;
  set.starts = ascent::random_starts(d, opts.restarts, rng);
  if (opts.include_seeded_starts) {
    const Matrix pooled = (centered_scatter(xs) + centered_scatter(ys)) / static_cast<double>(xs.n() + ys.n());
    for (auto& v : ascent::principal_directions(pooled, 3)) set.starts.push_back(std::move(v));
    const Vector shift = xs.mean() - ys.mean();
    if (shift.norm() > 0.0) set.starts.push_back(shift.normalized());
    if (d <= 3) {
      auto best = grid_search(d, ascent::seed_grid_resolution(d),
                              [&](const Vector& theta) { return objective.value(theta); });
      set.grid_value = best.value;
      set.starts.push_back(std::move(best.theta));
    }
  }
  const auto run = ascent::multi_start(objective, set.starts, opts);
  return finish(run, projected_w(xs, ys, run.theta, p), set, p, set.starts.size());
}

MswResult msw_vs_analytic(const SampleMatrix& xs, const DistributionSpec& spec, double p,
                          const OptimizerOpts& opts, const RngStream& rng) {
  check_p(p);
  opts.validate();
  const auto* gaussian = std::get_if<GaussianSpec>(&spec);
  if (gaussian == nullptr) throw UnsupportedError("msw_vs_analytic: only Gaussian specs have closed-form projections");
  validate(spec);
  if (static_cast<std::size_t>(gaussian->mean.size()) != xs.d()) {
    throw DomainError("msw_vs_analytic: dimension mismatch");
  }
  const std::size_t d = xs.d();
  if (d == 1) {
    MswResult result;
    result.value = projected_w_analytic(xs, *gaussian, Vector::Ones(1), p);
    return result;
  }
  AnalyticObjective objective(xs, *gaussian, p);
  StartSet set;
  set.starts = ascent::random_starts(d, opts.restarts, rng);
  if (opts.include_seeded_starts) {
    const Matrix pooled = 0.5 * (xs.covariance() + gaussian->covariance);
    for (auto& v : ascent::principal_directions(pooled, 3)) set.starts.push_back(std::move(v));
    const Vector shift = xs.mean() - gaussian->mean;
    if (shift.norm() > 0.0) set.starts.push_back(shift.normalized());
    if (d <= 3) {
      auto best = grid_search(d, ascent::seed_grid_resolution(d),
                              [&](const Vector& theta) { return objective.value(theta); });
      set.grid_value = best.value;
      set.starts.push_back(std::move(best.theta));
    }
  }
  const auto run = ascent::multi_start(objective, set.starts, opts);
  return finish(run, projected_w_analytic(xs, *gaussian, run.theta, p), set, p, set.starts.size());
}

MswResult msw_grid_oracle(const SampleMatrix& xs, const SampleMatrix& ys, double p, std::size_t resolution) {
  check_p(p);
  if (xs.d() != ys.d()) throw DomainError("msw_grid_oracle: dimension mismatch");
  const std::size_t d = xs.d();
  if (d != 2 && d != 3) throw UnsupportedError("msw_grid_oracle: only d = 2 and d = 3 are supported");
  EmpiricalObjective objective(xs, ys, p);
  const auto best = grid_search(d, resolution, [&](const Vector& theta) { return objective.value(theta); });
  MswResult result;
  result.value = projected_w(xs, ys, best.theta, p);
  result.argmax = Direction::normalized(best.theta);
  const double lipschitz = xs.data().rowwise().norm().maxCoeff() + ys.data().rowwise().norm().maxCoeff();
  result.error_bound = lipschitz * ascent::grid_spacing(d, resolution);
  return result;
}

double wasserstein_full(const SampleMatrix& xs, const SampleMatrix& ys, double p) {
  check_p(p);
  if (xs.d() != ys.d()) throw DomainError("wasserstein_full: dimension mismatch");
  if (xs.n() != ys.n()) throw DomainError("wasserstein_full: sample sizes must be equal");
  const std::size_t n = xs.n();
  if (n > kMaxAssignmentSize) throw ScaleError("wasserstein_full: n exceeds the exact assignment limit of 64");
  Matrix cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::pow((xs.row(i) - ys.row(j)).norm(), p);
    }
  }
  const auto assignment = solve_assignment(cost);
  return std::pow(std::max(0.0, assignment.cost / static_cast<double>(n)), 1.0 / p);
}

}  // namespace msw
