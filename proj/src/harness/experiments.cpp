#include "msw/error.hpp"
#include "msw/harness.hpp"
#include "msw/maxsliced.hpp"
#include "msw/ratio.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace msw::harness {

namespace {

constexpr std::size_t kRoleFirst = 0;
constexpr std::size_t kRoleSecond = 1;
constexpr std::size_t kRoleOptimizer = 2;

// Runs task(i) for i < count on `threads` workers. The first failure by index is rethrown
// after all workers stop; remaining items are skipped once a failure is seen.
template <typename Task>
void parallel_for(std::size_t count, std::size_t threads, Task&& task) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

struct TrialResult {
  double value = 0.0;
  double wall_s = 0.0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double overlay_bound(const Overlay& overlay, std::size_t n, double p) {
  double b = 0.0;
  switch (overlay.kind) {
    case bounds::BoundKind::Finite:
      b = bounds::expectation_bound_finite(overlay.params, n);
      break;
    case bounds::BoundKind::ExpDecay:
      b = bounds::expectation_bound_exp_decay(overlay.params, n);
      break;
    case bounds::BoundKind::PolyDecay:
      b = bounds::expectation_bound_poly_decay(overlay.params, n);
      break;
    default:
      throw ConfigError("overlay: unsupported bound kind");
  }
  return std::pow(b, 1.0 / p);
}

RateCurve aggregate(const ExperimentConfig& config, const std::vector<TrialResult>& trials, bool record_timing) {
  RateCurve curve;
  const std::size_t runs = config.mc_runs;
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    double sum = 0.0;
    double wall = 0.0;
    for (std::size_t t = 0; t < runs; ++t) {
      sum += trials[k * runs + t].value;
      wall += trials[k * runs + t].wall_s;
    }
    const double mean = sum / static_cast<double>(runs);
    double ss = 0.0;
    for (std::size_t t = 0; t < runs; ++t) {
      const double dev = trials[k * runs + t].value - mean;
      ss += dev * dev;
    }
    RateRow row;
    row.n = config.n_grid[k];
    row.mean = mean;
    row.std_error = runs > 1 ? std::sqrt(ss / static_cast<double>(runs - 1)) / std::sqrt(static_cast<double>(runs)) : 0.0;
    row.runs = runs;
    row.wall_s = record_timing ? wall / static_cast<double>(runs) : 0.0;
    if (config.overlay) row.bound = overlay_bound(*config.overlay, row.n, config.p);
    curve.rows.push_back(row);
  }
  return curve;
}

TrialResult run_trial(const ExperimentConfig& config, const DistributionSpec& spec, std::size_t k, std::size_t t) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.n_grid[k];
  RngStream first(config.master_seed, stream_index(k, t, config.mc_runs, kRoleFirst));
  const RngStream optimizer(config.master_seed, stream_index(k, t, config.mc_runs, kRoleOptimizer));
  const SampleMatrix xs = sample(spec, n, first);
  double value = 0.0;
  if (config.experiment == Experiment::RateVsTruth) {
    value = msw_vs_analytic(xs, spec, config.p, config.optimizer, optimizer).value;
  } else {
    RngStream second(config.master_seed, stream_index(k, t, config.mc_runs, kRoleSecond));
    const SampleMatrix ys = sample(spec, n, second);
    value = msw_empirical(xs, ys, config.p, config.optimizer, optimizer).value;
  }
  return TrialResult{value, seconds_since(start)};
}

RateCurve run_curve(const ExperimentConfig& config, const DistributionSpec& spec, const RunOptions& options) {
  const std::size_t items = config.n_grid.size() * config.mc_runs;
  std::vector<TrialResult> trials(items);
  parallel_for(items, resolve_threads(options.threads.value_or(config.threads)), [&](std::size_t i) {
    trials[i] = run_trial(config, spec, i / config.mc_runs, i % config.mc_runs);
  });
  return aggregate(config, trials, options.record_timing);
}

}  // namespace

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::uint64_t stream_index(std::size_t n_index, std::size_t trial, std::size_t mc_runs, std::size_t role) {
  return static_cast<std::uint64_t>(n_index) * mc_runs * 4 + static_cast<std::uint64_t>(trial) * 4 + role;
}

RateCurve run_rate_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  if (config.experiment == Experiment::RatioExceedance) {
    throw ConfigError("run_rate_experiment: ratio_exceedance is run by run_ratio_experiment");
  }
  RateCurve curve = run_curve(config, config.spec, options);
  if (const auto* r = std::get_if<RkhsPushforwardSpec>(&config.spec)) curve.d_test = r->d_test;
  return curve;
}

std::vector<RateCurve> run_rkhs_rate_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto* base = std::get_if<RkhsPushforwardSpec>(&config.spec);
  if (config.experiment != Experiment::RkhsRate || base == nullptr) {
    throw ConfigError("run_rkhs_rate_experiment: requires experiment rkhs_rate");
  }
  std::vector<std::size_t> list = config.d_test_list;
  if (list.empty()) list.push_back(base->d_test);
  std::vector<RateCurve> curves;
  for (const auto d_test : list) {
    RkhsPushforwardSpec spec = *base;
    spec.d_test = d_test;
    RateCurve curve = run_curve(config, spec, options);
    curve.d_test = d_test;
    curves.push_back(std::move(curve));
  }
  return curves;
}

RatioTable run_ratio_experiment(const ExperimentConfig& config, const std::vector<double>& eps_grid,
                                const RunOptions& options) {
  config.validate();
  if (config.experiment != Experiment::RatioExceedance) {
    throw ConfigError("run_ratio_experiment: requires experiment ratio_exceedance");
  }
  for (const double e : eps_grid) {
    if (!(e >= 0.0)) throw ConfigError("run_ratio_experiment: eps must be >= 0");
  }
  const std::size_t runs = config.mc_runs;
  const std::size_t items = config.n_grid.size() * runs;
  std::vector<double> stats(items);
  parallel_for(items, resolve_threads(options.threads.value_or(config.threads)), [&](std::size_t i) {
    const std::size_t k = i / runs;
    const std::size_t t = i % runs;
    RngStream first(config.master_seed, stream_index(k, t, runs, kRoleFirst));
    const RngStream optimizer(config.master_seed, stream_index(k, t, runs, kRoleOptimizer));
    const SampleMatrix xs = sample(config.spec, config.n_grid[k], first);
    stats[i] = ratio_sup(xs, config.spec, config.optimizer, optimizer).value;
  });
  RatioTable table;
  const std::uint64_t d = dimension(config.spec);
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    const std::vector<double> column(stats.begin() + static_cast<std::ptrdiff_t>(k * runs),
                                     stats.begin() + static_cast<std::ptrdiff_t>((k + 1) * runs));
    for (const double eps : eps_grid) {
      std::size_t hits = 0;
      for (const double v : column) hits += v >= eps ? 1 : 0;
      RatioRow row;
      row.n = config.n_grid[k];
      row.eps = eps;
      row.runs = runs;
      row.frequency = static_cast<double>(hits) / static_cast<double>(runs);
      row.freq_stderr = std::sqrt(row.frequency * (1.0 - row.frequency) / static_cast<double>(runs));
      const BoundValue b = ratio_tail_bound(row.n, d, eps);
      row.bound = b.clipped;
      row.bound_raw = b.raw;
      table.rows.push_back(row);
    }
    table.statistics.push_back(column);
  }
  return table;
}

SlopeFit fit_loglog_slope(const RateCurve& curve, std::size_t n_min) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : curve.rows) {
    if (row.n >= n_min && row.mean > 0.0) {
      xs.push_back(std::log(static_cast<double>(row.n)));
      ys.push_back(std::log(row.mean));
    }
  }
  if (xs.size() < 3) throw DomainError("fit_loglog_slope: needs at least 3 rows with n >= n_min and mean > 0");
  const double k = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_loglog_slope: n values do not vary");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.rows_used = xs.size();
  return fit;
}

}  // namespace msw::harness
