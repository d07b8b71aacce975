#pragma once

#include "msw/bounds.hpp"
#include "msw/measures.hpp"
#include "msw/sample_matrix.hpp"
#include "msw/sphere_ascent.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msw::harness {

enum class Experiment { RateVsTruth, RateTwoSample, RatioExceedance, RkhsRate };

const char* to_string(Experiment experiment);

/// Theoretical expectation bound drawn next to a rate curve, as bound^{1/p}.
struct Overlay {
  bounds::BoundKind kind = bounds::BoundKind::Finite;  // finite, exp_decay or poly_decay
  bounds::BoundParams params;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::RateVsTruth;
  DistributionSpec spec = GaussianSpec{Vector::Zero(2), Matrix::Identity(2, 2)};
  double p = 2.0;
  std::vector<std::size_t> n_grid{50, 100, 200, 400, 800, 1600};
  std::size_t mc_runs = 100;
  std::uint64_t master_seed = 1;
  OptimizerOpts optimizer;
  /// rkhs_rate: one curve per entry; empty means the pushforward's own d_test.
  std::vector<std::size_t> d_test_list;
  /// ratio_exceedance thresholds.
  std::vector<double> eps_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::optional<Overlay> overlay;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
};

/// Ordered `key = value` entries; `#` starts a comment.
using ConfigEntries = std::map<std::string, std::string>;

/// Throws ConfigError on malformed lines and duplicate keys.
ConfigEntries parse_entries(std::string_view text);

/// Builds and validates a config. Unknown keys are a ConfigError.
ExperimentConfig build_config(const ConfigEntries& entries);
ExperimentConfig parse_config(std::string_view text);
/// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string& path);

/// Optimizer settings from the optimizer_* keys, other keys ignored.
OptimizerOpts optimizer_from_entries(const ConfigEntries& entries);

/// Canonical `key = value` text listing every field, so equal configs give equal text.
std::string canonical_text(const ExperimentConfig& config);

/// Git blob hash (SHA-1 of "blob <len>\0" + content), lowercase hex.
std::string git_blob_hash(std::string_view content);

struct RateRow {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(runs)
  std::size_t runs = 0;
  double wall_s = 0.0;
  std::optional<double> bound;
};

struct RateCurve {
  std::vector<RateRow> rows;
  /// Set for rkhs_rate curves.
  std::optional<std::size_t> d_test;
};

struct RunOptions {
  /// Overrides config.threads when set.
  std::optional<std::size_t> threads;
  /// When false, wall_s is written as 0 so outputs compare bit for bit.
  bool record_timing = true;
};

/// Number of workers used for `requested` (0 = hardware concurrency, at least 1).
std::size_t resolve_threads(std::size_t requested);

/// Stream index of (n_index, trial, role) for roles 0 = first sample, 1 = second sample,
/// 2 = optimizer, 3 = spare.
std::uint64_t stream_index(std::size_t n_index, std::size_t trial, std::size_t mc_runs, std::size_t role);

/// Monte Carlo estimate of E[MSW_p] per n. rkhs_rate uses the pushforward's d_test.
RateCurve run_rate_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// One curve per d_test_list entry; all curves share the underlying source draws.
std::vector<RateCurve> run_rkhs_rate_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct RatioRow {
  std::size_t n = 0;
  double eps = 0.0;
  double frequency = 0.0;
  double freq_stderr = 0.0;
  double bound = 0.0;
  double bound_raw = 0.0;
  std::size_t runs = 0;
};

struct RatioTable {
  std::vector<RatioRow> rows;
  /// Per n (in n_grid order), the replicate statistics in trial order.
  std::vector<std::vector<double>> statistics;
};

/// Exceedance frequencies of ratio_sup against the clipped tail bound, per (n, eps).
RatioTable run_ratio_experiment(const ExperimentConfig& config, const std::vector<double>& eps_grid,
                                const RunOptions& options = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t rows_used = 0;
};

/// OLS of log(mean) on log(n) over rows with n >= n_min and mean > 0.
/// Throws DomainError with fewer than 3 usable rows.
SlopeFit fit_loglog_slope(const RateCurve& curve, std::size_t n_min = 0);

enum class Format { Csv, Json };

/// Throws ConfigError for anything but "csv" or "json".
Format parse_format(std::string_view name);

/// Shortest round-trip decimal form.
std::string format_number(double value);

std::string to_csv(const RateCurve& curve);
std::string to_csv(const std::vector<RateCurve>& curves);
std::string to_csv(const RatioTable& table);
std::string to_json(const RateCurve& curve);
std::string to_json(const std::vector<RateCurve>& curves);
std::string to_json(const RatioTable& table);

/// Inverse of to_csv / to_json for rate curves. Throws IoError on malformed input.
std::vector<RateCurve> parse_rate_csv(std::string_view text);
std::vector<RateCurve> parse_rate_json(std::string_view text);

/// Metadata document: full config, master_seed and the hash of the canonical config.
std::string meta_json(const ExperimentConfig& config);

/// Path of the metadata file written next to `out`.
std::string meta_path(const std::string& out);

/// Writes `content` to `path`; throws IoError with the path on failure.
void write_file(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

/// Writes the body to `path` and the metadata to meta_path(path).
void emit(const std::vector<RateCurve>& curves, Format format, const std::string& path,
          const ExperimentConfig& config);
void emit(const RatioTable& table, Format format, const std::string& path, const ExperimentConfig& config);

/// CSV of n rows by d columns; an `x1,...,xd` header is detected and skipped.
/// Throws IoError for unreadable files and malformed content.
SampleMatrix read_sample_csv(const std::string& path);
SampleMatrix parse_sample_csv(std::string_view text);
std::string to_sample_csv(const SampleMatrix& samples, bool header = false);

}  // namespace msw::harness
