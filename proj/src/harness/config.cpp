#include "msw/error.hpp"
#include "msw/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace msw::harness {

const char* to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::RateVsTruth:
      return "rate_vs_truth";
    case Experiment::RateTwoSample:
      return "rate_two_sample";
    case Experiment::RatioExceedance:
      return "ratio_exceedance";
    case Experiment::RkhsRate:
      return "rkhs_rate";
  }
  return "unknown";
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("config: '" + key + "' expects a real number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + text + "'");
}

std::vector<double> parse_reals(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split(text, ',')) out.push_back(static_cast<std::size_t>(parse_uint(key, item)));
  return out;
}

Experiment parse_experiment(const std::string& text) {
  if (text == "rate_vs_truth") return Experiment::RateVsTruth;
  if (text == "rate_two_sample") return Experiment::RateTwoSample;
  if (text == "ratio_exceedance") return Experiment::RatioExceedance;
  if (text == "rkhs_rate") return Experiment::RkhsRate;
  throw ConfigError("config: unknown experiment '" + text + "'");
}

// Reads keys from the entries, remembering which ones were consumed.
class Reader {
 public:
  explicit Reader(const ConfigEntries& entries) : entries_(entries) {}

  const std::string* get(const std::string& key) {
    used_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : entries_) {
      if (!used_.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
  }

 private:
  const ConfigEntries& entries_;
  std::set<std::string> used_;
};

Matrix parse_covariance(const std::string& text, std::size_t d) {
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  const std::string args = colon == std::string::npos ? std::string() : trim(text.substr(colon + 1));
  const auto dd = static_cast<Eigen::Index>(d);
  if (kind == "identity") return Matrix::Identity(dd, dd);
  if (kind == "equicorrelated") return equicorrelated(d, parse_double("covariance", args));
  if (kind == "diag") {
    const auto values = parse_reals("covariance", args);
    if (values.size() != d) throw ConfigError("config: covariance diag needs " + std::to_string(d) + " entries");
    Matrix m = Matrix::Zero(dd, dd);
    for (std::size_t i = 0; i < d; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
    return m;
  }
  if (kind == "full") {
    const auto values = parse_reals("covariance", args);
    if (values.size() != d * d) {
      throw ConfigError("config: covariance full needs " + std::to_string(d * d) + " entries");
    }
    Matrix m(dd, dd);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * d + j];
    }
    return m;
  }
  throw ConfigError("config: unknown covariance form '" + kind + "'");
}

template <typename F>
auto as_config_error(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

OptimizerOpts read_optimizer(Reader& r) {
  OptimizerOpts opts;
  if (auto* v = r.get("optimizer_restarts")) opts.restarts = parse_uint("optimizer_restarts", *v);
  if (auto* v = r.get("optimizer_max_iters")) opts.max_iters = parse_uint("optimizer_max_iters", *v);
  if (auto* v = r.get("optimizer_step0")) opts.step0 = parse_double("optimizer_step0", *v);
  if (auto* v = r.get("optimizer_step_decay")) opts.step_decay = parse_double("optimizer_step_decay", *v);
  if (auto* v = r.get("optimizer_tol")) opts.tol = parse_double("optimizer_tol", *v);
  if (auto* v = r.get("optimizer_include_seeded_starts")) {
    opts.include_seeded_starts = parse_bool("optimizer_include_seeded_starts", *v);
  }
  as_config_error([&] { opts.validate(); });
  return opts;
}

}  // namespace

ConfigEntries parse_entries(std::string_view text) {
  ConfigEntries entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(content).substr(0, eq));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (entries.count(key)) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    entries.emplace(std::move(key), std::move(value));
  }
  return entries;
}

OptimizerOpts optimizer_from_entries(const ConfigEntries& entries) {
  Reader r(entries);
  return read_optimizer(r);
}

ExperimentConfig build_config(const ConfigEntries& entries) {
  Reader r(entries);
  ExperimentConfig config;
  const std::string* experiment = r.get("experiment");
  if (experiment == nullptr) throw ConfigError("config: missing key 'experiment'");
  config.experiment = parse_experiment(*experiment);

  std::string spec_kind = config.experiment == Experiment::RkhsRate ? "rkhs" : "gaussian";
  if (auto* v = r.get("spec")) spec_kind = *v;
  std::size_t dim = 2;
  if (auto* v = r.get("dim")) dim = parse_uint("dim", *v);
  if (dim < 1) throw ConfigError("config: dim must be >= 1");
  const std::string* mean = r.get("mean");
  const std::string* covariance = r.get("covariance");
  const std::string* shape = r.get("pareto_shape");
  const std::string* sigma2 = r.get("kernel_sigma2");
  const std::string* w = r.get("kernel_w");
  const std::string* source_variance = r.get("source_variance");
  const std::string* d_test = r.get("d_test");
  if (spec_kind == "gaussian") {
    GaussianSpec g{Vector::Zero(static_cast<Eigen::Index>(dim)),
                   Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
    if (mean != nullptr) {
      const auto values = parse_reals("mean", *mean);
      if (values.size() == 1) {
        g.mean.setConstant(values[0]);
      } else if (values.size() == dim) {
        for (std::size_t i = 0; i < dim; ++i) g.mean[static_cast<Eigen::Index>(i)] = values[i];
      } else {
        throw ConfigError("config: mean needs 1 or " + std::to_string(dim) + " entries");
      }
    }
    if (covariance != nullptr) g.covariance = as_config_error([&] { return parse_covariance(*covariance, dim); });
    config.spec = g;
  } else if (spec_kind == "pareto") {
    config.spec = ParetoProductSpec{shape != nullptr ? parse_double("pareto_shape", *shape) : 8.0, dim};
  } else if (spec_kind == "rkhs") {
    const double s2 = sigma2 != nullptr ? parse_double("kernel_sigma2", *sigma2) : 4.0;
    const double ww = w != nullptr ? parse_double("kernel_w", *w) : 1.0;
    config.spec = as_config_error([&] {
      return DistributionSpec{RkhsPushforwardSpec{rkhs::KernelSpec(s2, ww),
                                                  source_variance != nullptr
                                                      ? parse_double("source_variance", *source_variance)
                                                      : 1.0,
                                                  d_test != nullptr ? parse_uint("d_test", *d_test) : 10}};
    });
  } else {
    throw ConfigError("config: unknown spec '" + spec_kind + "'");
  }

  if (auto* v = r.get("p")) config.p = parse_double("p", *v);
  if (auto* v = r.get("n_grid")) config.n_grid = parse_sizes("n_grid", *v);
  const bool gaussian = std::holds_alternative<GaussianSpec>(config.spec);
  config.mc_runs = gaussian ? 100 : 200;
  if (auto* v = r.get("mc_runs")) config.mc_runs = parse_uint("mc_runs", *v);
  if (auto* v = r.get("master_seed")) config.master_seed = parse_uint("master_seed", *v);
  config.optimizer = read_optimizer(r);
  if (auto* v = r.get("d_test_list")) config.d_test_list = parse_sizes("d_test_list", *v);
  if (auto* v = r.get("eps_grid")) config.eps_grid = parse_reals("eps_grid", *v);
  if (auto* v = r.get("threads")) config.threads = parse_uint("threads", *v);

  const std::string* overlay_kind = r.get("overlay_kind");
  const std::string* overlay_s = r.get("overlay_s");
  const std::string* overlay_gamma = r.get("overlay_gamma");
  const std::string* overlay_d = r.get("overlay_d");
  const std::string* overlay_c = r.get("overlay_c");
  const std::string* overlay_C = r.get("overlay_C");
  if (overlay_kind != nullptr) {
    Overlay overlay;
    overlay.kind = as_config_error([&] { return bounds::parse_kind(*overlay_kind); });
    overlay.params.p = config.p;
    overlay.params.s = overlay_s != nullptr ? parse_double("overlay_s", *overlay_s) : 2.0 * config.p + 1.0;
    if (overlay_gamma != nullptr) overlay.params.gamma = parse_double("overlay_gamma", *overlay_gamma);
    overlay.params.d = overlay_d != nullptr ? parse_double("overlay_d", *overlay_d)
                                            : static_cast<double>(as_config_error([&] { return dimension(config.spec); }));
    if (overlay_c != nullptr) overlay.params.c_user = parse_double("overlay_c", *overlay_c);
    if (overlay_C != nullptr) overlay.params.C_user = parse_double("overlay_C", *overlay_C);
    config.overlay = overlay;
  } else if (overlay_s || overlay_gamma || overlay_d || overlay_c || overlay_C) {
    throw ConfigError("config: overlay_* keys need overlay_kind");
  }
  r.reject_unknown();
  config.validate();
  return config;
}

void ExperimentConfig::validate() const {
  if (n_grid.empty()) throw ConfigError("config: n_grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw ConfigError("config: n_grid entries must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("config: n_grid must be strictly ascending");
  }
  if (mc_runs < 1) throw ConfigError("config: mc_runs must be >= 1");
  if (!(p >= 1.0)) throw ConfigError("config: p must be >= 1");
  as_config_error([&] { msw::validate(spec); });
  as_config_error([&] { optimizer.validate(); });
  const bool gaussian = std::holds_alternative<GaussianSpec>(spec);
  switch (experiment) {
    case Experiment::RateVsTruth:
      if (!gaussian) throw ConfigError("config: rate_vs_truth requires a Gaussian spec");
      break;
    case Experiment::RatioExceedance:
      if (!gaussian) throw ConfigError("config: ratio_exceedance requires a Gaussian spec");
      if (eps_grid.empty()) throw ConfigError("config: eps_grid is empty");
      for (const double e : eps_grid) {
        if (!(e >= 0.0)) throw ConfigError("config: eps_grid entries must be >= 0");
      }
      break;
    case Experiment::RkhsRate:
      if (!std::holds_alternative<RkhsPushforwardSpec>(spec)) throw ConfigError("config: rkhs_rate requires the rkhs spec");
      for (const auto d : d_test_list) {
        if (d < 1) throw ConfigError("config: d_test_list entries must be >= 1");
      }
      break;
    case Experiment::RateTwoSample:
      break;
  }
  if (overlay) {
    if (overlay->kind != bounds::BoundKind::Finite && overlay->kind != bounds::BoundKind::ExpDecay &&
        overlay->kind != bounds::BoundKind::PolyDecay) {
      throw ConfigError("config: overlay_kind must be finite, exp_decay or poly_decay");
    }
    as_config_error([&] { overlay->params.validate(); });
    if (overlay->kind == bounds::BoundKind::PolyDecay && !(overlay->params.gamma > 1.0)) {
      throw ConfigError("config: poly_decay overlay needs overlay_gamma > 1");
    }
  }
}

ExperimentConfig parse_config(std::string_view text) { return build_config(parse_entries(text)); }

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string canonical_text(const ExperimentConfig& config) {
  std::ostringstream out;
  auto line = [&](const std::string& key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto reals = [](auto begin, auto end) {
    std::string s;
    for (auto it = begin; it != end; ++it) s += (s.empty() ? "" : ",") + format_number(*it);
    return s;
  };
  auto sizes = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (const auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
  };
  line("experiment", to_string(config.experiment));
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          line("spec", "gaussian");
          line("dim", std::to_string(spec.mean.size()));
          line("mean", reals(spec.mean.data(), spec.mean.data() + spec.mean.size()));
          line("covariance", "full:" + reals(spec.covariance.data(), spec.covariance.data() + spec.covariance.size()));
        } else if constexpr (std::is_same_v<T, ParetoProductSpec>) {
          line("spec", "pareto");
          line("dim", std::to_string(spec.d));
          line("pareto_shape", format_number(spec.shape));
        } else {
          line("spec", "rkhs");
          line("kernel_sigma2", format_number(spec.kernel.sigma2()));
          line("kernel_w", format_number(spec.kernel.w()));
          line("source_variance", format_number(spec.source_variance));
          line("d_test", std::to_string(spec.d_test));
        }
      },
      config.spec);
  line("p", format_number(config.p));
  line("n_grid", sizes(config.n_grid));
  line("mc_runs", std::to_string(config.mc_runs));
  line("master_seed", std::to_string(config.master_seed));
  line("optimizer_restarts", std::to_string(config.optimizer.restarts));
  line("optimizer_max_iters", std::to_string(config.optimizer.max_iters));
  line("optimizer_step0", format_number(config.optimizer.step0));
  line("optimizer_step_decay", format_number(config.optimizer.step_decay));
  line("optimizer_tol", format_number(config.optimizer.tol));
  line("optimizer_include_seeded_starts", config.optimizer.include_seeded_starts ? "true" : "false");
  if (!config.d_test_list.empty()) line("d_test_list", sizes(config.d_test_list));
  if (config.experiment == Experiment::RatioExceedance) {
    line("eps_grid", reals(config.eps_grid.begin(), config.eps_grid.end()));
  }
  if (config.overlay) {
    const auto& o = *config.overlay;
    line("overlay_kind", bounds::to_string(o.kind));
    line("overlay_s", format_number(o.params.s));
    line("overlay_gamma", format_number(o.params.gamma));
    line("overlay_d", format_number(o.params.d));
    line("overlay_c", format_number(o.params.c_user));
    line("overlay_C", format_number(o.params.C_user));
  }
  return out.str();
}

std::string git_blob_hash(std::string_view content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + std::string(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
    throw Error("git_blob_hash: SHA-1 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace msw::harness
