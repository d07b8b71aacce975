#include "msw/error.hpp"
#include "msw/harness.hpp"
#include "msw/maxsliced.hpp"
#include "msw/rkhs.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace msw;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config, "key = value config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", flags.seed, "master seed (overrides the config)");
  cmd->add_option("--out", flags.out, "output path (stdout when omitted)");
  cmd->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", flags.threads, "worker threads, 0 = auto");
}

void write_output(const std::string& out, const std::string& body) {
  if (out.empty()) {
    std::cout << body;
  } else {
    harness::write_file(out, body);
  }
}

harness::ExperimentConfig load(const CommonFlags& flags) {
  auto entries = harness::parse_entries(harness::read_file(flags.config));
  if (flags.seed) entries["master_seed"] = std::to_string(*flags.seed);
  if (flags.threads) entries["threads"] = std::to_string(*flags.threads);
  return harness::build_config(entries);
}

int run_compute(const CommonFlags& flags, const std::string& x_path, const std::string& y_path, double p,
                const std::string& method, std::size_t resolution) {
  OptimizerOpts opts;
  std::uint64_t seed = 1;
  if (!flags.config.empty()) {
    const auto entries = harness::parse_entries(harness::read_file(flags.config));
    opts = harness::optimizer_from_entries(entries);
    if (auto it = entries.find("master_seed"); it != entries.end()) seed = std::stoull(it->second);
  }
  if (flags.seed) seed = *flags.seed;
  const auto xs = harness::read_sample_csv(x_path);
  const auto ys = harness::read_sample_csv(y_path);
  MswResult result;
  if (method == "full") {
    result.value = wasserstein_full(xs, ys, p);
  } else if (method == "grid") {
    result = msw_grid_oracle(xs, ys, p, resolution);
  } else {
    result = msw_empirical(xs, ys, p, opts, RngStream(seed, 0));
  }
  const bool with_direction = method != "full";
  if (harness::parse_format(flags.format) == harness::Format::Json) {
    json doc{{"method", method}, {"p", p}, {"value", result.value}};
    if (with_direction) {
      doc["argmax"] = std::vector<double>(result.argmax.coords().data(),
                                          result.argmax.coords().data() + result.argmax.coords().size());
      doc["restarts_used"] = result.restarts_used;
      doc["iterations"] = result.iterations;
      if (result.oracle_gap) doc["oracle_gap"] = *result.oracle_gap;
      if (result.error_bound) doc["error_bound"] = *result.error_bound;
    }
    write_output(flags.out, doc.dump(2) + '\n');
  } else {
    std::string header = "value";
    std::string row = harness::format_number(result.value);
    if (with_direction) {
      for (Eigen::Index k = 0; k < result.argmax.coords().size(); ++k) {
        header += ",theta" + std::to_string(k + 1);
        row += ',' + harness::format_number(result.argmax.coords()[k]);
      }
      header += ",restarts_used,iterations";
      row += ',' + std::to_string(result.restarts_used) + ',' + std::to_string(result.iterations);
      if (result.error_bound) {
        header += ",error_bound";
        row += ',' + harness::format_number(*result.error_bound);
      }
    }
    write_output(flags.out, header + '\n' + row + '\n');
  }
  return 0;
}

int run_rate(const CommonFlags& flags, bool no_timing) {
  const auto config = load(flags);
  harness::RunOptions options;
  options.record_timing = !no_timing;
  std::vector<harness::RateCurve> curves;
  if (config.experiment == harness::Experiment::RkhsRate) {
    curves = harness::run_rkhs_rate_experiment(config, options);
  } else if (config.experiment == harness::Experiment::RatioExceedance) {
    throw ConfigError("rate: ratio_exceedance configs are run with the ratio subcommand");
  } else {
    curves.push_back(harness::run_rate_experiment(config, options));
  }
  const auto format = harness::parse_format(flags.format);
  if (flags.out.empty()) {
    std::cout << (format == harness::Format::Csv ? harness::to_csv(curves) : harness::to_json(curves));
  } else {
    harness::emit(curves, format, flags.out, config);
  }
  return 0;
}

int run_ratio(const CommonFlags& flags) {
  const auto config = load(flags);
  if (config.experiment != harness::Experiment::RatioExceedance) {
    throw ConfigError("ratio: config experiment must be ratio_exceedance");
  }
  const auto table = harness::run_ratio_experiment(config, config.eps_grid);
  const auto format = harness::parse_format(flags.format);
  if (flags.out.empty()) {
    std::cout << (format == harness::Format::Csv ? harness::to_csv(table) : harness::to_json(table));
  } else {
    harness::emit(table, format, flags.out, config);
  }
  return 0;
}

int run_spectrum(const CommonFlags& flags, double sigma2, double w, std::size_t count, std::size_t quad_nodes) {
  if (!flags.config.empty()) {
    const auto entries = harness::parse_entries(harness::read_file(flags.config));
    if (auto it = entries.find("kernel_sigma2"); it != entries.end()) sigma2 = std::stod(it->second);
    if (auto it = entries.find("kernel_w"); it != entries.end()) w = std::stod(it->second);
  }
  const rkhs::SpectralBasis basis(rkhs::KernelSpec(sigma2, w));
  const auto report = rkhs::check_spectrum(basis, count, quad_nodes == 0 ? std::max<std::size_t>(64, count + 8) : quad_nodes);
  if (harness::parse_format(flags.format) == harness::Format::Json) {
    json rows = json::array();
    for (std::size_t j = 0; j < count; ++j) {
      rows.push_back(json{{"j", j},
                          {"lambda", rkhs::eigenvalue(basis, j)},
                          {"gram_diagonal", report.gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))},
                          {"eigen_residual", report.eigen_residuals[j]}});
    }
    json doc{{"sigma2", sigma2},
             {"w", w},
             {"kappa", basis.kernel().kappa()},
             {"decay_ratio", basis.decay_ratio()},
             {"max_orthonormality_error", report.max_orthonormality_error},
             {"max_eigen_residual", report.max_eigen_residual},
             {"rows", rows}};
    write_output(flags.out, doc.dump(2) + '\n');
  } else {
    std::string body = "j,lambda,gram_diagonal,eigen_residual\n";
    for (std::size_t j = 0; j < count; ++j) {
      body += std::to_string(j) + ',' + harness::format_number(rkhs::eigenvalue(basis, j)) + ',' +
              harness::format_number(report.gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))) + ',' +
              harness::format_number(report.eigen_residuals[j]) + '\n';
    }
    write_output(flags.out, body);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-sliced Wasserstein estimation and rate experiments"};
  app.require_subcommand(1);

  CommonFlags compute_flags;
  std::string x_path;
  std::string y_path;
  double p = 2.0;
  std::string method = "empirical";
  std::size_t resolution = 10000;
  auto* compute = app.add_subcommand("compute", "distance between two sample files");
  add_common(compute, compute_flags, false);
  compute->add_option("xs", x_path, "first sample CSV")->required();
  compute->add_option("ys", y_path, "second sample CSV")->required();
  compute->add_option("--p", p, "order p >= 1");
  compute->add_option("--method", method, "empirical, grid or full")
      ->check(CLI::IsMember({"empirical", "grid", "full"}));
  compute->add_option("--resolution", resolution, "grid size for --method grid");

  CommonFlags rate_flags;
  bool no_timing = false;
  auto* rate = app.add_subcommand("rate", "Monte Carlo rate curve");
  add_common(rate, rate_flags, true);
  rate->add_flag("--no-timing", no_timing, "write wall_s as 0");

  CommonFlags ratio_flags;
  auto* ratio = app.add_subcommand("ratio", "ratio-statistic exceedance table");
  add_common(ratio, ratio_flags, true);

  CommonFlags spectrum_flags;
  double sigma2 = 4.0;
  double w = 1.0;
  std::size_t count = 30;
  std::size_t quad_nodes = 0;
  auto* spectrum = app.add_subcommand("rkhs-spectrum", "Gaussian-kernel eigensystem report");
  add_common(spectrum, spectrum_flags, false);
  spectrum->add_option("--sigma2", sigma2, "base-measure variance");
  spectrum->add_option("--w", w, "kernel width");
  spectrum->add_option("--count", count, "number of eigenpairs");
  spectrum->add_option("--quad-nodes", quad_nodes, "Gauss-Hermite nodes for the Gram matrix, 0 = max(64, count + 8)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*compute) return run_compute(compute_flags, x_path, y_path, p, method, resolution);
    if (*rate) return run_rate(rate_flags, no_timing);
    if (*ratio) return run_ratio(ratio_flags);
    if (*spectrum) return run_spectrum(spectrum_flags, sigma2, w, count, quad_nodes);
  } catch (const IoError& e) {
    std::cerr << "msw: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "msw: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ScaleError& e) {
    std::cerr << "msw: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "msw: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "msw: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "msw: configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
